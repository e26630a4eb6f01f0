"""End-to-end smoke run of every dmfc command on a small generated dataset.

Usage:
    python scripts/functional_smoke_test.py
Optional env vars:
    WORK_DIR=/tmp/dmfc-smoke   (kept afterwards; a temporary directory otherwise)
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from dataclasses import dataclass

from click.testing import CliRunner

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app import create_app  # noqa: E402


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def run_command(runner: CliRunner, app, args: list, expected_code: int = 0) -> tuple[CheckResult, dict]:
    args = [str(a) for a in args]
    result = runner.invoke(app, args)
    ok = result.exit_code == expected_code
    lines = (result.stdout if expected_code == 0 else result.stderr).strip().splitlines()
    try:
        record = json.loads(lines[-1]) if lines else {}
    except json.JSONDecodeError:
        record = {}
    detail = f"exit={result.exit_code}"
    if not ok:
        detail += f" stderr={result.stderr.strip()[-300:]}"
    return CheckResult(" ".join(args[:1]), ok, detail), record


def run() -> int:
    work = os.environ.get("WORK_DIR") or tempfile.mkdtemp(prefix="dmfc-smoke-")
    data = os.path.join(work, "data")
    model = os.path.join(work, "model.dmfc")
    app = create_app("testing")
    runner = CliRunner()
    results: list[CheckResult] = []

    def check(args, expected_code=0):
        result, record = run_command(runner, app, args, expected_code)
        results.append(result)
        return record

    check(["gen-data", "--preset", "small", "--resolution", 0, "--spacing", 1, "--out", data])
    check(["build", "--data", data, "--out", model])
    check(["train-all", "--data", data, "--out", os.path.join(work, "compare"), "--rank", 6])
    check(["permute", "--data", data, "--out", os.path.join(work, "permuted.dmfc"), "--threshold", 2.0])

    mean = check(["sample", "--model", model, "--out", os.path.join(work, "mean"), "--theta", "0"])
    again = check(["sample", "--model", model, "--out", os.path.join(work, "mean_again"), "--theta", "0"])
    same = all(
        open(os.path.join(work, "mean", f), "rb").read() == open(os.path.join(work, "mean_again", f), "rb").read()
        for f in ("lollipop1.ply", "lollipop2.ply", "lollipop3.ply")
    )
    results.append(CheckResult("sample reproducible", same and mean.get("theta") == again.get("theta"),
                               f"identical_meshes={same}"))
    check(["sample", "--model", model, "--out", os.path.join(work, "pg0"), "--pg", 0, "--sd", 2, "--render"])

    check(["marginalize", "--model", model, "--out", os.path.join(work, "dmo.dmfc"),
           "--classes", "shape", "--classes", "pose"])
    observations = os.path.join(work, "observations.json")
    with open(observations, "w") as handle:
        json.dump([{"object": "lollipop3", "landmark": 0, "channel": "shape", "value": [0.5, 0.0, 0.0]}], handle)
    check(["posterior", "--model", model, "--observations", observations, "--out", os.path.join(work, "post.dmfc")])

    joint = os.path.join(data, "held_out", "joint_000")
    fitted = check(["fit", "--model", model, "--observation", joint, "--iterations", 100, "--chains", 2,
                    "--out", os.path.join(work, "fit")])
    results.append(CheckResult("fit report", "intensity_rms" in fitted, f"keys={sorted(fitted)}"))

    check(["eval-correlations", "--model", model, "--samples", 20, "--data", data, "--out", os.path.join(work, "eval")])
    check(["eval-specgen", "--model", model, "--data", data, "--samples", 5, "--iterations", 20,
           "--out", os.path.join(work, "eval")])
    check(["project-drr", "--volume", os.path.join(joint, "volume.raw"), "--axis", "z",
           "--out", os.path.join(work, "drr.npy")])

    # Error paths
    check(["sample", "--model", os.path.join(work, "missing.dmfc"), "--out", work], expected_code=3)
    check(["build", "--no-such-flag"], expected_code=2)

    passed = [r for r in results if r.passed]
    failed = [r for r in results if not r.passed]

    print(f"WORK_DIR={work}")
    print(f"Checks passed: {len(passed)}")
    print(f"Checks failed: {len(failed)}")

    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"[{status}] {result.name} -> {result.detail}")

    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(run())
