# Copyright 2026 The guidergen Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the guided sequence generation core."""

from gsg._gsg import (
    ConfigError,
    DimensionError,
    FormatError,
    NumericError,
    Session,
    bleu,
    bleu_multi,
    cumulative_rewards,
    default_config,
    feature_matching_rewards,
    parse_config,
    q_conditional,
    q_unconditional,
    sample_grammar,
    self_bleu,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "FormatError",
    "NumericError",
    "Session",
    "bleu",
    "bleu_multi",
    "cumulative_rewards",
    "default_config",
    "feature_matching_rewards",
    "parse_config",
    "q_conditional",
    "q_unconditional",
    "sample_grammar",
    "self_bleu",
]
