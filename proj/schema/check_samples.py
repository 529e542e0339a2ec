#!/usr/bin/env python3
"""Validate every sample document against the schema.

Files whose name starts with "malformed" must fail to parse as JSON.
"""
import json
import pathlib
import sys

import jsonschema


def main() -> int:
    schema = json.loads(pathlib.Path(sys.argv[1]).read_text())
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    for path in sorted(pathlib.Path(sys.argv[2]).glob("*.json")):
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            if path.name.startswith("malformed"):
                print(f"{path.name}: rejected as expected ({e.msg})")
            else:
                print(f"{path.name}: invalid JSON: {e}")
                failures += 1
            continue
        if path.name.startswith("malformed"):
            print(f"{path.name}: parsed but should not")
            failures += 1
            continue
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        for e in errors:
            print(f"{path.name}: /{'/'.join(map(str, e.path))}: {e.message}")
        failures += bool(errors)
        if not errors:
            print(f"{path.name}: ok")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
