#!/usr/bin/env python3
"""Convert ProPublica's compas-scores-two-years.csv to libsvm text.

Rows are filtered the way ProPublica's analysis does (screening within 30
days of arrest, known recidivism, no ordinary traffic offences, a score text).
Label: two_year_recid as +1/-1. Feature 1 is +1 for Caucasian, -1 otherwise;
the remaining 15 are listed in FEATURES. Counts and integer scores are
divided by their column maximum; the last feature is a constant intercept.

usage: compas_to_libsvm.py INPUT.csv OUTPUT.libsvm
"""

import csv
import math
import sys
from datetime import datetime

FEATURES = [
    "caucasian",
    "male",
    "age",
    "age_lt_25",
    "age_25_45",
    "age_gt_45",
    "juv_fel_count",
    "juv_misd_count",
    "juv_other_count",
    "priors_count",
    "felony",
    "decile_score",
    "v_decile_score",
    "log_days_in_jail",
    "days_b_screening_arrest",
    "intercept",
]
SCALED = {"age", "juv_fel_count", "juv_misd_count", "juv_other_count", "priors_count",
          "decile_score", "v_decile_score", "log_days_in_jail"}


def keep(row):
    if row["days_b_screening_arrest"] == "":
        return False
    lag = int(row["days_b_screening_arrest"])
    return (-30 <= lag <= 30 and row["is_recid"] != "-1"
            and row["c_charge_degree"] != "O" and row["score_text"] != "N/A")


def jail_days(row):
    try:
        t_in = datetime.fromisoformat(row["c_jail_in"])
        t_out = datetime.fromisoformat(row["c_jail_out"])
    except ValueError:
        return 0.0
    return max((t_out - t_in).total_seconds() / 86400.0, 0.0)


def features(row):
    age_cat = row["age_cat"]
    return {
        "caucasian": 1.0 if row["race"] == "Caucasian" else -1.0,
        "male": 1.0 if row["sex"] == "Male" else 0.0,
        "age": float(row["age"]),
        "age_lt_25": 1.0 if age_cat == "Less than 25" else 0.0,
        "age_25_45": 1.0 if age_cat == "25 - 45" else 0.0,
        "age_gt_45": 1.0 if age_cat == "Greater than 45" else 0.0,
        "juv_fel_count": float(row["juv_fel_count"]),
        "juv_misd_count": float(row["juv_misd_count"]),
        "juv_other_count": float(row["juv_other_count"]),
        "priors_count": float(row["priors_count"]),
        "felony": 1.0 if row["c_charge_degree"] == "F" else 0.0,
        "decile_score": float(row["decile_score"]),
        "v_decile_score": float(row["v_decile_score"]),
        "log_days_in_jail": math.log1p(jail_days(row)),
        "days_b_screening_arrest": int(row["days_b_screening_arrest"]) / 30.0,
        "intercept": 1.0,
    }


def main(src, dst):
    with open(src, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.DictReader(fh) if keep(r)]
    table = [features(r) for r in rows]
    labels = [1 if r["two_year_recid"] == "1" else -1 for r in rows]
    scale = {name: max(max(abs(t[name]) for t in table), 1e-12) for name in SCALED}
    with open(dst, "w", encoding="utf-8") as out:
        for y, t in zip(labels, table):
            parts = [f"{y:+d}"]
            for k, name in enumerate(FEATURES, start=1):
                v = t[name] / scale[name] if name in SCALED else t[name]
                if v != 0.0:
                    parts.append(f"{k}:{v:.6g}")
            out.write(" ".join(parts) + "\n")
    print(f"wrote {len(labels)} rows, {len(FEATURES)} features to {dst}", file=sys.stderr)


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
