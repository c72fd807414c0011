#!/usr/bin/env python3
"""Validate a report.json against schema/report.schema.json. Exit 0 when valid."""

import argparse
import json
import sys
from pathlib import Path

import jsonschema


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("report", type=Path)
    parser.add_argument("--schema", type=Path,
                        default=Path(__file__).resolve().parent.parent / "schema" / "report.schema.json")
    args = parser.parse_args()
    schema = json.loads(args.schema.read_text())
    report = json.loads(args.report.read_text())
    try:
        jsonschema.validate(report, schema, cls=jsonschema.Draft202012Validator)
    except jsonschema.ValidationError as e:
        print(f"{args.report}: {e.message} at {list(e.absolute_path)}", file=sys.stderr)
        return 1
    print(f"{args.report}: valid")
    return 0


if __name__ == "__main__":
    sys.exit(main())
