#!/usr/bin/env python3
"""Benchmark the JIT-compiled kernels against the pure-Python fallback.

Runs the same deterministic workload twice in subprocesses -- once normally
and once with REPQ_DISABLE_JIT=1 -- verifies both paths produce identical
results, and reports the throughput ratio.

Usage: python benchmarks/bench_kernels.py [--episodes N] [--mode MODE]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
from repq.engine import SimConfig, run_simulation
from repq._jit import JIT_ENABLED

payload = json.loads(sys.argv[1])
cfg = SimConfig(
    episodes=payload["episodes"],
    mode=payload["mode"],
    seed_fraction=0.2,
    rng_seed=1234,
)
run_simulation(SimConfig(episodes=2, mode=payload["mode"], rng_seed=1))  # warm compile
t0 = time.perf_counter()
result = run_simulation(cfg)
dt = time.perf_counter() - t0
print(json.dumps({
    "jit": JIT_ENABLED,
    "seconds": dt,
    "episodes_per_second": payload["episodes"] / dt,
    "coop_final": result.summary["coop_final"],
    "checksum": float(result.coop_level.sum()),
}))
"""


def run_once(disable_jit: bool, episodes: int, mode: str) -> dict:
    env = dict(os.environ)
    if disable_jit:
        env["REPQ_DISABLE_JIT"] = "1"
    else:
        env.pop("REPQ_DISABLE_JIT", None)
    payload = json.dumps({"episodes": episodes, "mode": mode})
    out = subprocess.run(
        [sys.executable, "-c", WORKER, payload],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=300,
                        help="episodes per timed run (fallback path is slow)")
    parser.add_argument("--mode", choices=("centralized", "decentralized"),
                        default="centralized")
    args = parser.parse_args()

    jit = run_once(False, args.episodes, args.mode)
    plain = run_once(True, args.episodes, args.mode)

    if jit["checksum"] != plain["checksum"]:
        print("ERROR: JIT and fallback paths diverged", file=sys.stderr)
        print(json.dumps({"jit": jit, "fallback": plain}, indent=2), file=sys.stderr)
        return 1

    speedup = jit["episodes_per_second"] / plain["episodes_per_second"]
    print(f"mode={args.mode} episodes={args.episodes} (identical outputs on both paths)")
    print(f"  jit:      {jit['episodes_per_second']:>10.1f} episodes/s  ({jit['seconds']:.2f}s)")
    print(f"  fallback: {plain['episodes_per_second']:>10.1f} episodes/s  ({plain['seconds']:.2f}s)")
    print(f"  speedup:  {speedup:.0f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
