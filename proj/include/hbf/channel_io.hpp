// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#ifndef HBF_CHANNEL_IO_HPP
#define HBF_CHANNEL_IO_HPP

#include "hbf/channel.hpp"

#include <json.hpp>

#include <cstdint>

namespace hbf {

// Channel dump: dimensions, per-path parameters and row-major [re, im]
// entry pairs of every H_k.
nlohmann::json channel_to_json(const ChannelSet& channels, const SystemConfig& cfg, std::uint64_t seed);
ChannelSet channel_from_json(const nlohmann::json& doc);

} // namespace hbf

#endif // HBF_CHANNEL_IO_HPP
