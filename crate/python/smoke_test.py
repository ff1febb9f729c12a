"""Smoke test for the Python bindings.

Build first:  pip install --no-build-isolation -e crates/python
Run:          python3 python/smoke_test.py
"""

import adaptive_smc_py as smc

EVENTUALLY_GOAL = """HOA: v1
States: 2
Start: 0
AP: 1 "goal"
acc-name: Rabin 1
Acceptance: 2 Fin(0) & Inf(1)
--BODY--
State: 0
[!0] 0
[0] 1
State: 1 {1}
[t] 1
--END--
"""


def main():
    chain = smc.Chain.generate("fig1:3")
    assert chain.n_states == 7 and chain.labels == ["goal"]
    assert abs(chain.actual_pmin - 0.01) < 1e-12

    # text round trip
    again = smc.Chain.from_text(*chain.to_text())
    assert again.n_transitions == chain.n_transitions

    assert abs(smc.exact_reach(chain, "goal") - 0.5) < 1e-12
    assert abs(smc.exact_ltl(chain, EVENTUALLY_GOAL) - 0.5) < 1e-12

    low = smc.check_reach(chain, "goal", p=0.4, epsilon=0.01, seed=1)
    assert low["decision"] == "H0", low
    assert low == smc.check_reach(chain, "goal", p=0.4, epsilon=0.01, seed=1)
    high = smc.check_ltl(chain, EVENTUALLY_GOAL, p=0.6, epsilon=0.01, seed=1)
    assert high["decision"] == "H1", high

    sym = smc.Chain.generate("fig4:10,2")
    mp = smc.estimate_mp(sym, mperr=0.1, delta=0.05, n_samples=100)
    assert mp["interval"]["lo"] <= 0.5 <= mp["interval"]["hi"], mp
    assert smc.bscc_inventory(smc.Chain.generate("fig4:1000,5")) == (2, 5)

    deep = smc.Chain.generate("fig3:18")
    assert smc.baseline(deep, "goal", p_term=1e-3, n_samples=200)["estimate"] < 0.5

    try:
        smc.check_reach(chain, "goal", p=0.4, epsilon=0.01, pmin=0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("pmin above the actual minimum must be refused")
    try:
        smc.check_reach(deep, "goal", p=0.5, epsilon=0.1, max_steps=50)
    except smc.DivergedError:
        pass
    else:
        raise AssertionError("expected divergence")

    print("smoke test passed")


if __name__ == "__main__":
    main()
