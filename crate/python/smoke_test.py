"""Smoke test for the pykinlangevin extension.

Build and install first:

    pip install -e crates/python --no-build-isolation
"""

import math

import pykinlangevin as kl


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    k = kl.kernel_coefficients(1.0, math.log(2.0))
    assert close(k.vel_decay, 0.5, 1e-15)
    assert close(k.b, 0.75, 1e-15)
    assert k.noise_det() >= 0.0

    s = kl.make_schedule(0.1, 10, 4.0, 2.0, 10.0)
    assert s.beta == 2.0 and s.k >= 1
    lc = kl.make_schedule(0.1, 10, 4.0, 2.0, 10.0, log_concave=True)
    assert close(lc.beta, 2.0 ** -0.5, 1e-15)

    f = kl.hypocoercive_factor(1.0, 1.0, 0.0, 0.0)
    assert close(f, math.exp(1.0 / 60.0), 1e-15)

    assert kl.tv_discrete([1.0, 0.0], [0.0, 1.0]) == 1.0
    assert close(kl.kl_discrete([1.0, 0.0], [0.5, 0.5]), math.log(2.0), 1e-15)
    assert kl.chi2_discrete([0.5, 0.5], [1.0, 0.0]) == math.inf
    assert kl.check_triangle_lemma([0.2, 0.8], [0.5, 0.5], [0.9, 0.1])[2]

    pi = ([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]])
    mean, cov = kl.propagate_continuous(*pi, 1.0, 1.0, 3.0)
    assert all(abs(m) < 1e-12 for m in mean)
    assert close(cov[0][0], 1.0, 1e-10) and close(cov[1][1], 1.0, 1e-10)

    st = kl.discrete_stationary(1.0, 1.0, 0.1)
    bias = kl.kl_mode(*st, *pi)
    assert 0.0 < bias < 1e-2
    mean, cov = kl.propagate_discrete(*st, 1.0, 1.0, 0.1, 10)
    assert close(cov[0][0], st[1][0][0], 1e-9)
    assert math.isinf(kl.log1p_chi2_mode([0.0, 0.0], [[2.5, 0.0], [0.0, 1.0]], *pi))

    rows = kl.run_chain_gaussian([1.0, 4.0], 0.1, 200, 500, 3, every=50)
    assert [r[0] for r in rows] == [0, 50, 100, 150, 200]
    assert rows == kl.run_chain_gaussian([1.0, 4.0], 0.1, 200, 500, 3, every=50)
    assert 0.8 < rows[-1][2] / 2.0 < 1.2

    try:
        kl.kernel_coefficients(-1.0, 0.1)
    except ValueError:
        pass
    else:
        raise AssertionError("negative friction accepted")

    sweep = kl.sweep([1, 16])
    assert all(r[1] >= 1 and r[2] >= 1 for r in sweep)

    print(f"pykinlangevin {kl.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
