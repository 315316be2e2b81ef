"""Tests for strategy name parsing and cooperating-set bookkeeping."""

import pytest

from tdcoop.strategies import Strategy, parse_strategy


class TestParseStrategy:
    def test_mac(self):
        s = parse_strategy("mac", 3)
        assert (s.family, s.mode) == ("mac", "mac")
        assert not s.cooperative
        assert not s.uses_relay
        assert s.hops(1) == 1

    def test_rc_variants(self):
        for fam in ("ddf", "af"):
            s = parse_strategy(f"rc-{fam}", 3)
            assert s.family == fam
            assert s.mode == "rc"
            assert s.uses_relay
            assert s.hops(2) == 2

    def test_uc2_default_sets(self):
        s = parse_strategy("uc2-ddf", 3)
        assert s.mode == "uc2"
        assert s.helpers(1) == (2, 3)
        assert s.helpers(3) == (1, 2)
        assert s.hops(1) == 2

    def test_uc3_multihop(self):
        s = parse_strategy("uc3-af", 3)
        assert s.mode == "ucmh"
        assert s.hops(1) == 3
        assert s.helpers(2) == (1, 3)

    def test_forward_counts_symmetric_default(self):
        s = parse_strategy("uc3-ddf", 3)
        for j in (1, 2, 3):
            assert s.num_forwarded(j) == 2

    def test_hop_count_must_fit_user_count(self):
        with pytest.raises(ValueError):
            parse_strategy("uc3-ddf", 2)
        # K = 4 leaves room for 3-hop with a chosen pair of helpers
        s = parse_strategy("uc3-ddf", 4, coop_sets={1: (2, 3), 2: (3, 4), 3: (4, 1), 4: (1, 2)})
        assert s.helpers(4) == (1, 2)

    def test_unknown_names_rejected(self):
        for bad in ("", "tdma", "uc-ddf", "uc1-ddf", "rc", "uc2-xx", "mac-ddf"):
            with pytest.raises(ValueError):
                parse_strategy(bad, 3)

    def test_custom_coop_sets_validated(self):
        with pytest.raises(ValueError):
            # user may not help itself
            parse_strategy("uc2-ddf", 3, coop_sets={1: (1,), 2: (3,), 3: (2,)})
        with pytest.raises(ValueError):
            # out-of-range helper
            parse_strategy("uc2-ddf", 3, coop_sets={1: (4,), 2: (3,), 3: (2,)})

    def test_asymmetric_sets_change_burst_sharing(self):
        s = parse_strategy("uc2-ddf", 3, coop_sets={1: (2, 3), 2: (1,), 3: (1,)})
        assert s.helpers(1) == (2, 3)
        # user 1 forwards for both others, users 2 and 3 only for user 1
        assert s.num_forwarded(1) == 2
        assert s.num_forwarded(2) == 1


class TestStrategyInvariants:
    def test_multihop_mode_field(self):
        s = parse_strategy("uc3-ddf", 3)
        assert s.multihop_mode == "accumulating"
        s2 = Strategy(
            name="uc3-ddf", family="ddf", mode="ucmh", num_users=3,
            coop_sets=s.coop_sets, multihop_mode="per-fraction",
        )
        assert s2.multihop_mode == "per-fraction"

    def test_invalid_multihop_mode_rejected(self):
        s = parse_strategy("uc3-ddf", 3)
        with pytest.raises(ValueError):
            Strategy(
                name="uc3-ddf", family="ddf", mode="ucmh", num_users=3,
                coop_sets=s.coop_sets, multihop_mode="bogus",
            )
