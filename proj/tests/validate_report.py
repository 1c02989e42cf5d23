"""Runs horizon subcommands and validates every report.json against the schema."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main() -> int:
    horizon, schema_path, example_config = sys.argv[1], sys.argv[2], sys.argv[3]
    schema = json.loads(Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    light = ["--pairs", "2000", "--hash-samples", "20000", "--arcs", "10", "--ray-seeds", "10",
             "--escape-seeds", "16", "--perturbations", "4"]
    cases = [(sub, ["--field", "rot_decay_repel"], 0)
             for sub in ["spectrum", "flow", "foliation", "tangency", "index", "classify", "verify"]]
    cases += [
        ("all", ["--field", "linear_hurwitz"], 0),
        ("verify", ["--field", "model_reeb"], 0),
        ("spectrum", ["--f-expr", "-x + 0.1*y", "--g-expr", "-y", "--sigma", "1"], 0),
        ("spectrum", ["--f-expr", "x+*y", "--g-expr", "y"], 1),
        ("flow", ["--field", "linear_hurwitz", "--point", "0.1,0"], 2),
        ("index", ["--field", "rot_decay_repel", "--tol-index", "1e-300"], 3),
        ("classify", ["--config", example_config], 0),
    ]
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        for i, (sub, args, expected) in enumerate(cases):
            out = Path(tmp) / f"run{i}"
            proc = subprocess.run([horizon, sub, *args, *light, "--out", str(out)], capture_output=True, text=True)
            label = f"{sub} {' '.join(args)}"
            if proc.returncode != expected:
                print(f"FAIL {label}: exit {proc.returncode}, expected {expected}\n{proc.stderr}")
                failures += 1
                continue
            report = json.loads((out / "report.json").read_text())
            errors = list(validator.iter_errors(report))
            for e in errors[:5]:
                print(f"FAIL {label}: {list(e.path)}: {e.message}")
            failures += bool(errors)
            if report["status"]["exit_code"] != expected:
                print(f"FAIL {label}: status.exit_code mismatch")
                failures += 1
            for name in report["artifacts"]:
                if not (out / name).is_file():
                    print(f"FAIL {label}: missing artifact {name}")
                    failures += 1
            if not errors:
                print(f"ok   {label} (exit {expected})")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
