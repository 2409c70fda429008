"""Runs the lowdeg CLI and validates every JSON artifact against schemas/."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

ROOT = pathlib.Path(__file__).resolve().parent.parent
SCHEMAS = ROOT / "schemas"


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def run(tool, *args, ok=(0,)):
    proc = subprocess.run([tool, *map(str, args)], capture_output=True, text=True)
    if proc.returncode not in ok:
        sys.exit(f"{' '.join(map(str, args))} exited {proc.returncode}: {proc.stderr}")
    return proc.stdout


def check(name, doc, label):
    jsonschema.validate(doc, schema(name))
    print(f"ok {label} ({name})")


def main(tool):
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        for spec in sorted((ROOT / "specs").glob("*.json")):
            check("spec", json.loads(spec.read_text()), spec.name)

        run(tool, "gen", "--spec", ROOT / "specs/planted_binary.json", "--out", tmp / "b.csv")
        run(tool, "gen", "--spec", ROOT / "specs/planted_l3.json", "--out", tmp / "t.csv")
        cases = [
            ("b.csv", ["--family", "degree", "--degree", "2"], "0.05"),
            ("b.csv", ["--family", "interval", "--delta", "0.25"], "0.1"),
            ("b.csv", ["--family", "lipschitz", "--eta", "0.5"], "0.1"),
            ("t.csv", ["--family", "degree", "--degree", "3"], "0.05"),
            ("t.csv", ["--family", "interval", "--delta", "0.5"], "0.1"),
        ]
        for i, (data, fam, alpha) in enumerate(cases):
            pred = tmp / f"p{i}.json"
            summary = run(tool, "train", "--data", tmp / data, "--alpha", alpha, "--out", pred,
                          "--format", "json", *fam)
            check("train_summary", json.loads(summary), f"train {data} {' '.join(fam)}")
            check("predictor", json.loads(pred.read_text()), pred.name)
            report = run(tool, "audit", "--data", tmp / data, "--predictor", pred, "--alpha", alpha,
                         "--format", "json", *fam)
            check("audit_report", json.loads(report), f"audit {pred.name}")

        for data, pred in [("t.csv", "fstar"), ("t.csv", tmp / "p3.json")]:
            out = run(tool, "diagnose", "--data", tmp / data, "--predictor", pred, "--alpha", "0.05",
                      "--degree", "3", ok=(0, 1))
            check("diagnose_report", json.loads(out), f"diagnose {data} {pred}")


if __name__ == "__main__":
    main(sys.argv[1])
