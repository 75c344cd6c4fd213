# Copyright 2026 The cotrobust Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python access to the robustness evaluation harness."""

from ._cotrobust import (
    CotrobustError,
    auroc,
    chi_square,
    detect_anchors,
    entropy_bits,
    entropy_series,
    ks_two_sample,
    matrix_size,
    normalized_distance,
    pass_at_k,
    perturb,
    relative_degradation,
    run_replay,
    wilcoxon,
)

__all__ = [
    "CotrobustError",
    "auroc",
    "chi_square",
    "detect_anchors",
    "entropy_bits",
    "entropy_series",
    "ks_two_sample",
    "matrix_size",
    "normalized_distance",
    "pass_at_k",
    "perturb",
    "relative_degradation",
    "run_replay",
    "wilcoxon",
]
