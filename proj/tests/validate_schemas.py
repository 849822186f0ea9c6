"""Runs each JSON-emitting cusp-torsion command and validates the output against schemas/."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

cli, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])

with tempfile.TemporaryDirectory() as tmp:
    def cfg(name, doc):
        p = pathlib.Path(tmp) / f"{name}.json"
        p.write_text(json.dumps(doc))
        return ["--config", str(p)]

    poincare = {"reference": "poincare", "charts": [{"radius": 0.5, "log_conformal": "0"}]}
    runs = [
        ("constants", []),
        ("constants", ["--paper-constants"]),
        ("psi-check", []),
        ("kernel", ["--t-grid", "0.1:1:3"]),
        ("torsion", cfg("torus", {"M": "square_torus", "gram_h0": [[2.0]], "gram_h1": [[1.0]]}) + ["--paper-constants"]),
        ("selberg", cfg("sel", {"lengths": [1.0, 2.0], "s": [2.0, 3.0], "k_max": 200})),
        ("anomaly", ["--theta", "1e-4"]),
        ("anomaly", cfg("cusp", {"mode": "cusp", "g": poincare, "g0": poincare, "n": -1})),
        ("anomaly", cfg("scal", {"mode": "scaling", "surface": "round_sphere", "c": 0.3})),
        ("flatten", cfg("tight", {"family": {"kind": "tight", "n": -1}, "samples": 200}) + ["--theta", "1e-2,1e-3"]),
        ("flatten", []),
        ("verify", ["--only", "7"]),
    ]
    for command, extra in runs:
        out = subprocess.run([cli, command, *extra], capture_output=True, text=True, check=True).stdout
        doc = json.loads(out)
        schema = json.loads((schema_dir / f"{command}.schema.json").read_text())
        jsonschema.validate(doc, schema)
        print(f"ok {command} {' '.join(extra)}")
