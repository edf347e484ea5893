#!/usr/bin/env python3
"""Smoke test for the Python bindings.

Builds the extension module with cargo, stages it under a temp directory as
``shrinker_py.so`` and checks a handful of closed-form values end to end.

Run from the repository root:  python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_and_stage(stage_dir: Path) -> None:
    subprocess.run(
        ["cargo", "build", "-p", "shrinker-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    built = ROOT / "target" / "debug" / "libshrinker_py.so"
    if not built.exists():  # macOS fallback
        built = ROOT / "target" / "debug" / "libshrinker_py.dylib"
    shutil.copy(built, stage_dir / "shrinker_py.so")


def approx(a: float, b: float, tol: float = 1e-10) -> None:
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main() -> None:
    stage = Path(tempfile.mkdtemp(prefix="shrinker_py_"))
    build_and_stage(stage)
    sys.path.insert(0, str(stage))
    import shrinker_py as sp

    # Exact jets of u(x) = x^3 at x = 2.
    cubic = sp.GraphSpec.from_json(
        '{"n":1,"m":1,"components":[{"kind":"poly","terms":[{"coef":"1","exps":[3]}]}]}'
    )
    jet = sp.eval_jet(cubic, [2.0], order=3)
    approx(jet["u"][0], 8.0, 0.0)
    approx(jet["du"][0][0], 12.0, 0.0)
    approx(jet["d2u"][0][0][0], 12.0, 0.0)
    approx(jet["d3u"][0][0][0][0], 6.0, 0.0)

    # Linear graphs solve the system; u = x^2 has residual 2 at the origin.
    lin = sp.GraphSpec.linear([[1.5, -0.25], [0.0, 2.0]])
    assert max(abs(r) for r in sp.shrinker_residual(lin, [3.0, -7.0])) < 1e-12
    quad = sp.GraphSpec.from_json(
        '{"n":1,"m":1,"components":[{"kind":"poly","terms":[{"coef":"1","exps":[2]}]}]}'
    )
    approx(sp.shrinker_residual(quad, [0.0])[0], 2.0, 1e-13)

    # Metric of slope 1/2 in the pseudo signature: det g = 3/4, *dx = 2/sqrt(3).
    slope = sp.GraphSpec.linear([[0.5]])
    pack = sp.metric(slope, [1.0], signature="pseudo_euclidean")
    approx(pack["detg"], 0.75, 1e-14)
    star = sp.star_dx(slope, [1.0])
    approx(star["value"], 2.0 / math.sqrt(3.0), 1e-13)
    assert star["discrepancy"] < 1e-12

    # Curvature of the round paraboloid at the origin: H = n.
    parab = sp.GraphSpec.iso_quadratic(3, 1, 1.0)
    approx(sp.curvature(parab, [0.0, 0.0, 0.0])["hcomp"][0], 3.0, 1e-12)

    # Volume element of u = x^2: phi = ln(1 + 4x^2), phi' = 8x/(1 + 4x^2).
    phi = sp.volume_phi(quad, [0.5])
    approx(phi["value"], math.log(2.0), 1e-12)
    approx(phi["grad"][0], 2.0, 1e-12)

    # Frame reduction agrees between its two closed forms.
    red = sp.frame_reduction(2, 2, [0.7, 0.3], [0.1, 0.2, 0.2, -0.4, 0.0, 0.5, 0.5, 0.3])
    assert red["discrepancy"] < 1e-13

    # Exponent machinery: s0 bracket and the witness at s = 4.
    s0 = sp.s0_solve()
    assert 3.4 < s0 < 3.5
    zeta, margin = sp.zeta_witness(4.0)
    approx(zeta, 1.6, 1e-14)
    approx(margin, 1.6**4 - 5.0, 1e-12)
    approx(sp.growth_constants(4.0, 2, 1.0, 1.0, 1.0, 1.0)["r_big_sq"], 4.0, 1e-12)

    # Heat operator of the rescaled quadratic at the pulled-back origin.
    hr = sp.heat_residual(quad, 3.0, [0.0], 1.0)
    approx(hr["direct"][0], -1.0 / math.sqrt(2.0), 1e-12)
    assert hr["discrepancy"] < 1e-13

    # Quadratic potential closed forms and the Lewy rotation.
    pot = sp.PotentialSpec.iso_quadratic(2, 0.4)
    approx(sp.euclid_potential_residual(pot, [0.3, -0.8]), 2.0 * math.atan(0.4), 1e-12)
    approx(
        sp.pseudo_potential_residual(pot, [0.3, -0.8]),
        math.log(1.4 / 0.6),
        1e-12,
    )
    rot = sp.lewy_rotate(pot, [1.0, -2.0])
    approx(rot["xbar"][0], 0.6 / math.sqrt(2.0), 1e-13)
    approx(rot["d2w"][0][0], 1.4 / 0.6, 1e-12)
    assert rot["d2w_positive_definite"]
    cons = sp.gradient_consistency(pot, [0.5, 0.5])
    assert cons["discrepancy"] < 1e-12

    # Radial shooting: zero data reaches r_max, unit data does not.
    assert sp.shoot([0.0], 2)["outcome"] == "global"
    assert sp.shoot([1.0], 2)["outcome"] != "global"

    # Decay profile of a spacelike linear graph trends toward zero.
    rows = sp.decay_profile(sp.GraphSpec.linear([[0.6, 0.0]]), [1.0, 10.0, 100.0])
    assert rows[-1][1] < rows[0][1]

    print("smoke_test: all bindings checks passed")


if __name__ == "__main__":
    main()
