"""Run the acceptance criteria and write a JSON report; exit 1 if any criterion fails."""
import argparse
import json
import sys

from magspec import acceptance


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--fast", action="store_true", help="closed-form criteria only")
    p.add_argument("--only", default=None, help="comma list of criterion numbers")
    p.add_argument("--json", default=None)
    a = p.parse_args()
    numbers = [int(v) for v in a.only.split(",")] if a.only else None
    results = acceptance.run(numbers, fast=a.fast)
    for r in results:
        print(r.line())
    if a.json:
        with open(a.json, "w") as fh:
            json.dump([r.to_json() for r in results], fh, indent=2)
    sys.exit(0 if all(r.passed for r in results) else 1)


if __name__ == "__main__":
    main()
