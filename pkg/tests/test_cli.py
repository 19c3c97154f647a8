import json
import subprocess
import sys

import pytest

from cvrpsuite.cli import main
from cvrpsuite.env import random_instance
from cvrpsuite.exact import brute_force_optimal
from cvrpsuite.instance import parse_solution, validate, write_cvrplib
from cvrpsuite.policy import load_params, load_sidecar


@pytest.fixture
def toy(tmp_path):
    inst = random_instance(6, 9, 20, seed=12, name="toy6")
    path = tmp_path / "toy6.vrp"
    write_cvrplib(inst, path)
    return inst, path


@pytest.mark.parametrize("solver", ["exact", "savings", "gls"])
def test_solve(solver, toy, capsys):
    inst, path = toy
    assert main(["solve", str(path), "--solver", solver, "--time-limit", "2", "--seed", "1"]) == 0
    sol = parse_solution(capsys.readouterr().out)
    assert validate(inst, sol).feasible
    if solver == "exact":
        assert sol.cost == pytest.approx(brute_force_optimal(inst).cost, abs=1e-6)


def test_export_lp(toy, tmp_path, capsys):
    _, path = toy
    assert main(["export-lp", str(path)]) == 0
    text = capsys.readouterr().out
    assert text.startswith("\\ MTZ") and text.endswith("End\n")
    main(["export-lp", str(path), "-o", str(tmp_path / "m.lp")])
    assert (tmp_path / "m.lp").read_text() == text


def test_train_then_solve_rl(toy, tmp_path, capsys):
    inst, path = toy
    cfg = {"embedding_dim": 8, "encoder_layers": 1, "heads": 2, "ff_dim": 8, "batch_size": 4,
           "batches_per_epoch": 1, "epochs": 2, "n_customers": 6, "eval_size": 4,
           "problem": "tsp", "output_dir": str(tmp_path / "tsp")}
    (tmp_path / "tsp.json").write_text(json.dumps(cfg))
    assert main(["train", "--config", str(tmp_path / "tsp.json")]) == 0
    tsp_weights = tmp_path / "tsp" / "weights.bin"
    assert load_params(tsp_weights).config.problem == "tsp"
    assert load_sidecar(tsp_weights)["epochs"] == 2

    cfg.update(problem="cvrp", output_dir=str(tmp_path / "cvrp"))
    (tmp_path / "cvrp.json").write_text(json.dumps(cfg))
    assert main(["train", "--config", str(tmp_path / "cvrp.json"), "--overfit", str(path),
                 "--reuse", str(tsp_weights)]) == 0
    weights = tmp_path / "cvrp" / "weights.bin"
    assert (tmp_path / "cvrp" / "curves" / "train.csv").exists()
    capsys.readouterr()

    for extra in ([], ["--beam", "3"]):
        assert main(["solve", str(path), "--solver", "rl", "--weights", str(weights)] + extra) == 0
        assert validate(inst, parse_solution(capsys.readouterr().out)).feasible
    assert main(["solve", str(path), "--solver", "rl"]) == 2


def test_bench(toy, tmp_path, capsys):
    _, path = toy
    cfg = {"instances": [str(path)], "solvers": ["savings", "gls"], "repetitions": 2,
           "budget": 0.3, "output_dir": str(tmp_path / "b")}
    (tmp_path / "bench.json").write_text(json.dumps(cfg))
    assert main(["bench", "--config", str(tmp_path / "bench.json")]) == 0
    out = capsys.readouterr().out
    assert "| gls |" in out and "0.3*" in out
    for name in ("results.csv", "results.md", "timing.csv"):
        assert (tmp_path / "b" / name).exists()


def test_module_entry_point(toy):
    _, path = toy
    res = subprocess.run([sys.executable, "-m", "cvrpsuite", "solve", str(path), "--solver", "savings"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.startswith("Route #1:")


def test_bad_arguments():
    with pytest.raises(SystemExit):
        main(["solve", "x.vrp", "--solver", "lkh3"])
    with pytest.raises(SystemExit):
        main([])
