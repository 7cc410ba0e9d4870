"""
Monte-Carlo acceptance runs on the 100x100 rectangle and two-shape scenarios.

These take minutes; run them with ``pytest --runslow``.
"""

import pytest

from changeset_scan.core.connect import ScanMode, estimate_change_set, split_components
from changeset_scan.core.experiment import run_cell, trial_seed
from changeset_scan.core.lattice import jaccard_distance
from changeset_scan.core.scan import OverlapRule
from changeset_scan.core.synth import table_scenario, two_shape_scenario

REPS = 100

pytestmark = pytest.mark.slow


def cell(rule, gamma, d, mode=ScanMode.HORIZONTAL, reps=REPS, scenario=None):
    scenario = scenario or table_scenario()
    return run_cell(scenario, mode, OverlapRule.parse(rule), gamma, d, reps, base_seed=0, workers=4)


def test_six_two_horizontal_converges():
    """(6,2), gamma 0: about 0.10 at d = 500 and 0.01 at d = 1000."""
    assert abs(cell("6,2", 0.0, 500).mean - 0.10) <= 0.05
    assert abs(cell("6,2", 0.0, 1000).mean - 0.01) <= 0.03


def test_six_two_combined_is_exact_at_1000():
    """Combined scanning with (6,2) recovers the rectangle at d = 1000."""
    assert cell("6,2", 0.0, 1000, ScanMode.BOTH).mean <= 0.03


def test_four_one_fails_above_threshold():
    """(4,1) with gamma 0 sits above the noise threshold and fails."""
    assert cell("4,1", 0.0, 1000).mean >= 0.90


def test_six_four_never_fires():
    """(6,4) needs all five windows at a boundary to agree, which sigma2 = 2 prevents."""
    for d in (300, 1000):
        assert abs(cell("6,4", 0.0, d).mean - 1.0) <= 0.02


def test_weighting_rescues_four_one():
    """gamma 0.3 makes (4,1) improve with d."""
    means = [cell("4,1", 0.3, d).mean for d in (300, 500, 1000)]
    assert means[0] > means[2]
    assert means[2] <= 0.30


def test_exact_recovery_at_low_noise():
    """sigma2 = 0.1, (6,2), gamma 0: exact in at least 95% of 50 trials at d = 2000."""
    scenario = table_scenario(sigma2=0.1)
    short = cell("6,2", 0.0, 1000, reps=50, scenario=scenario)
    long = cell("6,2", 0.0, 2000, reps=50, scenario=scenario)
    assert long.exact_freq >= 0.95
    assert long.exact_freq >= short.exact_freq
    assert short.mean <= 0.01


def test_quarter_weighting_sits_in_the_table_band():
    """(6,2) with gamma 0.25 at d = 1000 lands between the gamma 0.2 and 0.3 values."""
    assert 0.05 <= cell("6,2", 0.25, 1000).mean <= 0.30


def test_two_shapes_need_combined_scanning():
    """Combined scanning recovers both shapes; horizontal scanning loses the diamond."""
    scenario = two_shape_scenario()
    diamond, round_set = scenario.shape_sets()
    rule = OverlapRule(16, 8)
    both_exact = 0
    diamond_lost = 0
    trials = 20
    for t in range(trials):
        seq = scenario.with_seed(trial_seed(0, scenario.frames, t)).generate()
        both = estimate_change_set(seq, ScanMode.BOTH, rule, 0.0)
        parts = split_components(both)
        if len(parts) == 2 and parts[0] == diamond and parts[1] == round_set:
            both_exact += 1
        horizontal = estimate_change_set(seq, ScanMode.HORIZONTAL, rule, 0.0)
        near_diamond = horizontal - round_set
        if jaccard_distance(near_diamond, diamond) > 0:
            diamond_lost += 1
    assert both_exact >= 0.9 * trials
    assert diamond_lost >= 0.9 * trials
