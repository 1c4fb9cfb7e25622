"""Smoke tests for the python bindings. Runs standalone or under pytest."""

import math

import gpbinreg as gp


def test_version():
    assert gp.version() == "0.1.0"


def test_kernel_value():
    assert gp.kernel_value(0.3, 0.3) == 1.0
    assert gp.kernel_value(0.1, 0.7, tau=4.0, lam=1.0) == gp.kernel_value(0.7, 0.1, tau=4.0, lam=1.0)
    # tau scales, lambda sharpens
    assert gp.kernel_value(0.2, 0.2, tau=4.0) == 0.25
    assert gp.kernel_value(0.0, 0.5, lam=3.0) < gp.kernel_value(0.0, 0.5, lam=1.0)


def test_links():
    for name in ("logistic", "probit"):
        for p in (0.05, 0.5, 0.93):
            assert abs(gp.link_forward(name, gp.link_inverse(name, p)) - p) < 1e-12
    assert abs(gp.link_forward("logistic", 1.0) - 1.0 / (1.0 + math.exp(-1.0))) < 1e-15


def test_rkhs():
    # a single atom of weight 2 has squared norm 4 k(x, x) = 4
    assert abs(gp.rkhs_norm_sq([0.4], [2.0]) - 4.0) < 1e-12
    vals = gp.rkhs_evaluate([0.4], [2.0], 1.0, [0.4])
    assert abs(vals[0] - 2.0) < 1e-12


def test_bernstein():
    got = gp.bernstein(lambda t: t * t, 10, 0.5)
    assert abs(got - 0.2733333333333333) < 1e-12


def test_gp_sample_deterministic():
    x1, v1 = gp.gp_sample(seed=9, grid_points=33)
    x2, v2 = gp.gp_sample(seed=9, grid_points=33)
    assert x1 == x2 and v1 == v2
    assert len(x1) == 33 and x1[0] == 0.0 and x1[-1] == 1.0
    _, d1 = gp.gp_sample(seed=9, grid_points=33, derivative_order=1)
    assert d1 != v1


def test_simulate():
    data = gp.simulate(n=60, seed=5)
    assert len(data["x"]) == 60 and len(data["y"]) == 60
    assert set(data["y"]) <= {0, 1}
    assert all(0.0 < p < 1.0 for p in data["p0"])
    again = gp.simulate(n=60, seed=5)
    assert again["y"] == data["y"] and again["x"] == data["x"]


def test_fit():
    data = gp.simulate(n=40, seed=11)
    res = gp.fit(data["x"], data["y"], iters=400, burn=100, seed=12, grid_points=33, truncation=8)
    assert res["diagnostics"]["kept"] == 300
    assert len(res["grid"]) == 33
    assert len(res["p_mean"]) == 33
    assert all(0.0 <= p <= 1.0 for p in res["p_mean"])
    assert all(lo <= hi for lo, hi in zip(res["p_q10"], res["p_q90"]))
    assert len(res["tau"]) == 300
    assert res["diagnostics"]["eigen_failures"] == 0


def test_campaigns():
    ids = gp.known_campaigns()
    assert len(ids) == 12 and "spacing" in ids
    cfg = gp.campaign_defaults("spacing")
    assert cfg["campaign"] == "spacing"
    report = gp.campaign("spacing", replicates=20)
    assert report["campaign"] == "spacing"
    assert report["pass"] is True
    assert len(report["replicates"]) == 20
    assert report["config_hash"]


def main():
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_")]
    for name, fn in tests:
        fn()
        print(f"ok {name}")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    main()
