"""Regenerates the bundled CSV fixtures.

cancer_small, wine_binary, diabetes and diabetes_binary are derived from the
public datasets shipped with scikit-learn. concrete_small is a synthetic
surrogate with the column layout of the UCI concrete compressive strength
data (8 numeric mixture features); its target comes from a fixed nonlinear
formula plus noise, not from laboratory measurements.
"""
import gzip
import os

import numpy as np
from sklearn import datasets

HERE = os.path.dirname(os.path.abspath(__file__))
rng = np.random.default_rng(20200601)


def write(name, header, rows):
    with open(os.path.join(HERE, name), "w") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(r) + "\n")


def fmt(v):
    return f"{v:.6g}"


# breast cancer: 300-row subsample, the ten "mean" features
bc = datasets.load_breast_cancer()
idx = np.sort(rng.choice(len(bc.target), 300, replace=False))
cols = [c.replace(" ", "_") for c in bc.feature_names[:10]]
write(
    "cancer_small.csv",
    cols + ["diagnosis"],
    [[fmt(v) for v in bc.data[i, :10]] + ["benign" if bc.target[i] == 1 else "malignant"] for i in idx],
)

# wine: cultivar 2 against the rest
wn = datasets.load_wine()
cols = [c.replace("/", "_") for c in wn.feature_names]
write(
    "wine_binary.csv",
    cols + ["cultivar2"],
    [[fmt(v) for v in wn.data[i]] + ["yes" if wn.target[i] == 1 else "no"] for i in range(len(wn.target))],
)

# diabetes, raw (unscaled) variables; sex kept categorical
base = os.path.join(os.path.dirname(datasets.__file__), "data")
with gzip.open(os.path.join(base, "diabetes_data_raw.csv.gz"), "rt") as f:
    raw = np.loadtxt(f)
with gzip.open(os.path.join(base, "diabetes_target.csv.gz"), "rt") as f:
    target = np.loadtxt(f)
names = ["age", "sex", "bmi", "bp", "s1", "s2", "s3", "s4", "s5", "s6"]


def diab_row(i):
    r = [fmt(v) for v in raw[i]]
    r[1] = "f" if raw[i, 1] == 1 else "m"
    return r


write("diabetes.csv", names + ["progression"], [diab_row(i) + [fmt(target[i])] for i in range(len(target))])
med = np.median(target)
write(
    "diabetes_binary.csv",
    names + ["high_progression"],
    [diab_row(i) + ["high" if target[i] > med else "low"] for i in range(len(target))],
)

# concrete-like surrogate
n = 300
cement = rng.uniform(102, 540, n)
slag = np.where(rng.random(n) < 0.5, 0.0, rng.uniform(10, 360, n))
ash = np.where(rng.random(n) < 0.55, 0.0, rng.uniform(24, 200, n))
water = rng.uniform(121, 247, n)
sp = np.where(rng.random(n) < 0.35, 0.0, rng.uniform(1.7, 32, n))
coarse = rng.uniform(801, 1145, n)
fine = rng.uniform(594, 993, n)
age = rng.choice([3, 7, 14, 28, 56, 90, 180, 365], n, p=[.13, .12, .06, .42, .09, .07, .06, .05])
binder = cement + 0.6 * slag + 0.4 * ash
maturity = np.log1p(age) / np.log1p(28)
strength = 15 * (binder / water) ** 1.1 * maturity / (0.35 + 0.65 * maturity)
strength += 0.35 * sp - 0.004 * (coarse - 970) + rng.normal(0, 4.5, n)
strength = np.clip(strength, 2.33, 82.6)
cols = ["cement", "slag", "fly_ash", "water", "superplasticizer", "coarse_aggregate", "fine_aggregate", "age"]
mat = np.column_stack([cement, slag, ash, water, sp, coarse, fine, age])
write("concrete_small.csv", cols + ["strength"], [[fmt(v) for v in mat[i]] + [fmt(strength[i])] for i in range(n)])
