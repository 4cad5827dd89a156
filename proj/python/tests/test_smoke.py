import numpy as np
import pytest

import metasolve as ms


def test_mesh_info():
    info = ms.mesh_info(31)
    assert info["node_count"] == 961
    assert info["interior_count"] == 841
    assert info["triangles"].shape == (1800, 3)
    assert info["coarse_chain"] == [16, 6]


def test_assemble_and_linear_solve():
    n = 9
    k = ms.grf_sample(n, mean=1.0, sigma=0.3, floor=0.1, seed=3)
    assert k.shape == (n * n,) and k.min() >= 0.1
    data, indices, indptr, shape = ms.assemble(n, k)["stiffness"]
    assert shape == (49, 49)
    a = np.zeros(shape)
    for i in range(shape[0]):
        a[i, indices[indptr[i]:indptr[i + 1]]] = data[indptr[i]:indptr[i + 1]]
    assert np.allclose(a, a.T)
    b = np.ones(shape[0])
    for method in ("cg", "fgmres", "bicgstab"):
        x, rep = ms.solve_linear(data, indices, indptr, b, method=method)
        assert rep["converged"]
        assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_solve_one_config():
    row = ms.solve(n=9, seed=5, krylov="fgmres", smoother="ssor", strategy="1-1-1", levels=2)
    assert row["converged"], row["failure"]
    assert row["rel_error"] <= 1e-10
    assert row["macs"] > 0
    assert row["final_state"].shape == (81,)
    again = ms.solve(n=9, seed=5, krylov="fgmres", smoother="ssor", strategy="1-1-1", levels=2)
    assert again["macs"] == row["macs"] and again["iterations"] == row["iterations"]


def test_enumerate_and_sweep(tmp_path):
    manifest = "n = 9\nkrylov = bicgstab, fgmres\nlevels = 1, 2\nseed = 5\n"
    configs = ms.enumerate_configs(manifest)
    assert [c["id"] for c in configs] == [0, 1, 2, 3]
    out = tmp_path / "results.csv"
    summary = ms.run_sweep(manifest, output=str(out))
    assert summary["runs"] == 4 and summary["failures"] == 0
    text = out.read_text().splitlines()
    assert text[0] == ms.RESULTS_HEADER and len(text) == 5
    rows = ms.read_results(str(out))
    assert [r["macs"] for r in rows] == [r["macs"] for r in summary["rows"]]


def test_pareto_rank_rediscover():
    pts = np.array([[0.0, 1.0], [1.0, 0.0], [0.4, 0.4], [0.9, 0.9]])
    assert ms.pareto_set(pts) == [0, 1, 2]
    assert ms.dominates([0.4, 0.4], [0.9, 0.9])
    r = ms.rescale(pts)
    assert r["values"].min() == 0.0 and r["values"].max() == 1.0
    best = ms.preference_rank(r["values"], [0.5, 0.5], k=1)["top"][0]
    assert best[0] == 2
    res = ms.rediscover(r["values"], 2)
    assert res["status"] == "feasible"
    assert sum(res["lambda"]) == pytest.approx(1.0)
    assert ms.rediscover(np.array([[0.0, 1.0], [1.0, 0.0], [0.6, 0.6]]), 2)["status"] == "infeasible"


def test_errors_surface_as_python_exceptions():
    with pytest.raises(ValueError):
        ms.pareto_set(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        ms.solve(n=9, krylov="minres")
    with pytest.raises(ValueError):
        ms.preference_rank(np.zeros((2, 2)), [0.7, 0.7])
