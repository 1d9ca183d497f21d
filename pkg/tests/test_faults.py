import pytest

from checkify import faults
from checkify.checkification import AnalysisFailed, Error
from checkify.scenarios import SCENARIOS, detected, run_anatest, run_containment

REQUIRED = {
    "modes_aliasing_blind": "I", "length_missing_nondet": "I", "neq_builtin_wrong": "I",
    "spurious_ground_vars": "I", "fixpoint_cut_deadcode": "II", "linear_as_disjoint": "III",
    "mshare_order_sensitive": "IV", "clique_rt_missing": "IV", "mshare_ignores_clique": "IV",
    "instance_rt_missing": "IV", "depthk_glb_not_greatest": "I", "trust_exp_int": "V",
}


def test_registry_has_every_required_fault():
    for fid, cls in REQUIRED.items():
        assert faults.get(fid).cls == cls
    assert set(SCENARIOS) == set(faults.REGISTRY)


def test_unknown_fault():
    with pytest.raises(faults.UnknownFault):
        faults.enable("no_such_fault")
    with pytest.raises(faults.UnknownFault):
        with faults.injected("no_such_fault"):
            pass


def test_enable_disable_and_scoping():
    faults.reset()
    try:
        faults.enable("neq_builtin_wrong")
        assert faults.active("neq_builtin_wrong")
        with faults.injected("trust_exp_int"):
            assert faults.enabled() == {"neq_builtin_wrong", "trust_exp_int"}
        assert faults.enabled() == {"neq_builtin_wrong"}
        faults.disable("neq_builtin_wrong")
        assert not faults.enabled()
    finally:
        faults.reset()


def test_incompatible_faults_refused():
    with pytest.raises(ValueError):
        with faults.injected("mshare_order_sensitive", "mshare_ignores_clique"):
            pass
    assert not faults.enabled()


def test_context_restores_after_exception():
    with pytest.raises(RuntimeError):
        with faults.injected("trust_exp_int"):
            raise RuntimeError
    assert not faults.enabled()


@pytest.mark.parametrize("fid", sorted(SCENARIOS))
def test_fault_is_detected_by_its_scenario(fid):
    sc = SCENARIOS[fid]
    how = faults.get(fid).expected_detection
    methods = ("anatest", "containment") if how == "both" else (how,)
    for m in methods:
        assert detected(sc, m), (fid, m)


@pytest.mark.parametrize("fid", sorted(SCENARIOS))
def test_scenario_is_clean_without_its_fault(fid):
    sc = SCENARIOS[fid]
    assert not detected(sc, "anatest", inject=False)
    assert not detected(sc, "containment", inject=False)


@pytest.mark.parametrize("fid", sorted(f for f, x in REQUIRED.items() if x == "IV"))
def test_runtime_check_faults_split_the_oracles(fid):
    sc = SCENARIOS[fid]
    assert isinstance(run_anatest(sc), (Error, AnalysisFailed))
    assert run_containment(sc) == []
