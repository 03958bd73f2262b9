/*
 * Copyright 2026 The trendlm authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "trendlm/entity.hpp"

#include <stdexcept>

#include "trendlm/text.hpp"

namespace trendlm {

std::string normalize_entity_name(std::string_view raw) {
  std::string normalized = text::normalize_text(raw);
  if (normalized.empty()) {
    throw std::invalid_argument("entity name is empty after normalization");
  }
  return normalized;
}

EntityId EntityPool::intern(std::string_view raw) {
  std::string key = normalize_entity_name(raw);
  auto it = index_.find(key);
  if (it != index_.end()) return EntityId{it->second};
  const auto id = static_cast<std::uint32_t>(names_.size());
  index_.emplace(key, id);
  names_.push_back(std::move(key));
  return EntityId{id};
}

std::optional<EntityId> EntityPool::find(std::string_view raw) const {
  std::string key = text::normalize_text(raw);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return EntityId{it->second};
}

const std::string& EntityPool::name(EntityId id) const {
  if (id.value >= names_.size()) {
    throw std::out_of_range("unknown entity id");
  }
  return names_[id.value];
}

}  // namespace trendlm
