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

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trendlm {

/// Interned handle for a normalized entity-name string. Two ids from the
/// same pool compare equal iff their normalized strings are identical.
struct EntityId {
  std::uint32_t value = UINT32_MAX;
  auto operator<=>(const EntityId&) const = default;
};

/// Case-folds and collapses whitespace; rejects names that normalize to the
/// empty string.
std::string normalize_entity_name(std::string_view raw);

/// Bijective string interner for entity names. Interning normalizes first,
/// so "Jennifer  Aniston " and "jennifer aniston" share one id.
class EntityPool {
 public:
  EntityId intern(std::string_view raw);
  std::optional<EntityId> find(std::string_view raw) const;
  const std::string& name(EntityId id) const;
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

}  // namespace trendlm

template <>
struct std::hash<trendlm::EntityId> {
  std::size_t operator()(const trendlm::EntityId& id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
