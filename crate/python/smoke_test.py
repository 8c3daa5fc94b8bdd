"""Builds the extension module with cargo and exercises it from Python.

Usage: python3 python/smoke_test.py
"""

import json
import os
import shutil
import subprocess
import sys
import sysconfig
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "meshroute-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    target = os.environ.get("CARGO_TARGET_DIR", os.path.join(ROOT, "target"))
    lib = os.path.join(target, "release", "libmeshroute_py.so")
    out = tempfile.mkdtemp(prefix="meshroute-py-")
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    shutil.copy(lib, os.path.join(out, "meshroute" + suffix))
    return out


def main():
    sys.path.insert(0, build())
    import meshroute as mr

    topo = mr.Topology.generate(25, seed=42)
    assert topo.node_count == 25 and len(topo.gateways) == 3
    assert topo.is_connected()
    assert mr.Topology.from_json(topo.to_json()).to_json() == topo.to_json()
    assert json.loads(topo.to_json())["gateways"] == topo.gateways

    source = next(i for i in range(topo.node_count) if i not in topo.gateways)
    runs = {alg: mr.route(topo, source, algorithm=alg, seed=7) for alg in ("pso", "ga", "hybrid")}
    for alg, run in runs.items():
        path = run["best_path"]
        assert path[0] == source and topo.validate_path(path), alg
        assert len(run["fitness_trace"]) == run["iterations_executed"], alg
        assert all(a >= b for a, b in zip(run["fitness_trace"], run["fitness_trace"][1:])), alg

    small = mr.Topology.generate(10, seed=3)
    src = next(i for i in range(10) if i not in small.gateways)
    path, best = mr.oracle(small, src)
    found = mr.route(small, src, seed=1)
    assert abs(found["best_fitness"]["total"] - best["total"]) < 1e-9

    best_path = runs["hybrid"]["best_path"]
    sim = mr.simulate(topo, best_path, packets=20_000, seed=1)
    loss = {frozenset((l["u"], l["v"])): l["loss"] for l in topo.links()}
    expected = 1.0
    for a, b in zip(best_path, best_path[1:]):
        expected *= 1.0 - loss[frozenset((a, b))]
    assert abs(sim["pdr"] - expected) < 0.02
    assert topo.path_metrics(best_path)["hops"] == len(best_path) - 1

    try:
        mr.route(topo, source, algorithm="nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown algorithm accepted")

    print(f"ok: hybrid route {best_path} F={runs['hybrid']['best_fitness']['total']:.4f} pdr={sim['pdr']:.4f}")


if __name__ == "__main__":
    main()
