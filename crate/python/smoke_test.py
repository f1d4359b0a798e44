"""Smoke test for the cqwell Python bindings.

Build and install first:  pip install maturin && maturin develop -m crates/python/Cargo.toml
"""

import math

import cqwell


def main():
    # Symmetric well: oscillator ladder.
    eps = cqwell.levels(k1=1.0, k2=1.0, n=5)
    for k, e in enumerate(eps):
        assert abs(e - (k + 0.5)) < 1e-10, (k, e)

    # Asymmetric well levels increase and the dipole matrix is symmetric.
    eps = cqwell.levels(k1=1.0, k2=4.0, n=6)
    assert all(a < b for a, b in zip(eps, eps[1:]))
    x, lam = cqwell.dipole(k1=1.0, k2=4.0, n=6)
    assert all(abs(x[i][j] - x[j][i]) < 1e-12 for i in range(6) for j in range(6))
    assert lam == sorted(lam)

    # Kernel routes agree and the interval vanishes at its start.
    a = cqwell.kernel(2.0, 1.5, route="fourier")
    b = cqwell.kernel(2.0, 1.5, route="power")
    assert abs(a - b) < 1e-10, (a, b)
    assert cqwell.kernel(1.0, 3.0, xi0=1.0) == 0

    # Driven evolution conserves total population.
    xi, pops = cqwell.evolve(beta=0.05, omega=math.sqrt(2.0), n=6)
    assert len(xi) == 65 and abs(xi[-1] - 2 * math.pi) < 1e-12
    assert all(abs(sum(p) - 1.0) < 1e-10 for p in pops)

    # A short scan has its dominant peak inside the scanned range.
    omegas = [0.5 + 0.1 * i for i in range(11)]
    rows, peak = cqwell.scan(omegas, beta=0.05, omega_ref=1.0, k1=1.0, k2=1.0)
    assert len(rows) == 11 and peak in omegas

    try:
        cqwell.levels(k1=-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative stiffness accepted")

    print(f"cqwell {cqwell.__version__} python smoke test: ok")


if __name__ == "__main__":
    main()
