//! Optional generated plotting script. Plotting is presentation, not
//! computation: the script is a standalone artifact for an external Python
//! with matplotlib, and nothing in the toolchain depends on it.

use crate::CliError;
use std::path::{Path, PathBuf};

/// Write a self-contained script that plots every numeric column of `csv`
/// against its first column and saves a PNG next to it.
pub fn emit(script: &PathBuf, csv: &Path) -> Result<(), CliError> {
    let csv_name = csv.display();
    let body = format!(
        r##"#!/usr/bin/env python3
"""Plot columns of {csv_name} against its first column."""
import csv
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_name:?}
rows = []
with open(path) as fh:
    for line in fh:
        if line.startswith("#") or not line.strip():
            continue
        rows.append(line.strip())

reader = csv.reader(rows)
header = next(reader)
data = {{name: [] for name in header}}
for rec in reader:
    for name, value in zip(header, rec):
        try:
            data[name].append(float(value))
        except ValueError:
            data[name].append(float("nan"))

x = data[header[0]]
fig, ax = plt.subplots(figsize=(7, 4.5))
for name in header[1:]:
    ys = data[name]
    if any(y == y for y in ys):
        ax.plot(x, ys, marker="o", markersize=3, label=name)
ax.set_xlabel(header[0])
ax.grid(True, alpha=0.4)
ax.legend()
out = path.rsplit(".", 1)[0] + ".png"
fig.tight_layout()
fig.savefig(out, dpi=130)
print(f"wrote {{out}}")
"##
    );
    std::fs::write(script, body).map_err(|e| CliError::Usage(format!("{}: {e}", script.display())))
}
