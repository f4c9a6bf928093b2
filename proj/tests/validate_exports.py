import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

cli, schema_path = sys.argv[1], sys.argv[2]
schema = json.loads(Path(schema_path).read_text())
ids = [line.split()[0] for line in subprocess.run([cli, "gallery", "list"], check=True,
                                                   capture_output=True, text=True).stdout.splitlines()]
with tempfile.TemporaryDirectory() as out:
    for i in ids:
        subprocess.run([cli, "gallery", "export", i, "--out", out], check=True, capture_output=True)
        jsonschema.validate(json.loads((Path(out) / f"{i}.json").read_text()), schema)
        print("ok", i)
