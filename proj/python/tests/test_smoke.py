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

import math
from pathlib import Path

import pytest

import cotrobust

REPLAY = Path(__file__).resolve().parents[2] / "tests" / "data" / "replay"


def test_pass_at_k_and_rd():
    assert cotrobust.pass_at_k(10, 10, 1) == 1.0
    assert cotrobust.pass_at_k(4, 2, 2) == pytest.approx(5 / 6)
    assert cotrobust.relative_degradation(0.0, 0.3) == 0.0
    assert cotrobust.relative_degradation(0.5, 0.25) == pytest.approx(0.5)


def test_entropy_and_distance():
    assert cotrobust.entropy_bits([0.5, 0.25, 0.25]) == pytest.approx(1.5)
    assert cotrobust.normalized_distance(50, 40, 100) == pytest.approx(0.1)


def test_statistics():
    w = cotrobust.wilcoxon([1.0, 2.0])
    assert w["p_value"] == pytest.approx(0.5)
    # Statistic 40 on one degree of freedom.
    chi = cotrobust.chi_square([[20, 0], [0, 20]])
    assert chi["p_value"] == pytest.approx(math.erfc(math.sqrt(20)))
    assert cotrobust.ks_two_sample([1, 2, 3], [1, 2, 3])["statistic"] == 0.0
    assert cotrobust.auroc([3, 4], [1, 2]) == 1.0


def test_errors_are_translated():
    with pytest.raises(cotrobust.CotrobustError):
        cotrobust.wilcoxon([0.0, 0.0])


def test_perturb_case_flip():
    text, diff, offline = cotrobust.perturb("Input", "C1", 0, 1.0)
    assert text == "iNpUt"
    assert diff == [("Input", "iNpUt")]
    assert not offline


def test_anchors_on_small_trace():
    tokens = ["Use", " acc", "\n", "```", "python", "\n", "acc", " =", " 0", "\n", "for", " x", ":", " acc", "\n", "```"]
    steps = [(t, 0.9, {"<alt>": 0.1}) for t in tokens]
    a = cotrobust.detect_anchors(steps, 1)
    assert a["a1"] == 3
    assert a["a2"] == 1
    assert a["a3"] == 10
    entropy, diff = cotrobust.entropy_series(steps)
    assert len(entropy) == len(tokens)


def test_matrix_size():
    assert cotrobust.matrix_size(508, 8, 2, 2, 2, 10) == 325120


def test_replay_matches_golden(tmp_path):
    cotrobust.run_replay([REPLAY / "mhpp.jsonl", REPLAY / "bcb.jsonl"], tmp_path, REPLAY)
    for golden in (REPLAY / "golden").iterdir():
        assert (tmp_path / golden.name).read_bytes() == golden.read_bytes(), golden.name
