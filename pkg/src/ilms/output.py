"""CSV/JSON writers with a fixed, locale-independent number format."""

import csv
import json
import math


def fmt(x):
    """Full double precision, '.' decimal separator."""
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def write_json(path, obj):
    clean = {k: _jsonable(v) for k, v in obj.items()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(clean, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def write_sim_csv(path, result):
    rows = zip(range(len(result.msd)), result.msd, result.msd_db,
               result.emse, result.emse_db)
    write_csv(path, ["iteration", "msd_linear", "msd_db", "emse_linear", "emse_db"],
              ([str(i), *vals] for i, *vals in rows))


def write_theory_csv(path, curve):
    rows = zip(range(len(curve.msd)), curve.msd_db, curve.emse_db)
    write_csv(path, ["iteration", "theory_msd_db", "theory_emse_db"],
              ([str(i), a, b] for i, a, b in rows))
