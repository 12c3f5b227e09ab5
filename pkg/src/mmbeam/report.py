"""CSV, metadata and plot-script writers for scenario outputs.

Floats are written with 17 significant digits so pinned runs compare
byte-for-byte.
"""

from __future__ import annotations

import csv
import datetime
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Sequence

from . import __version__
from .codebook import Codebook, codebook_header, codebook_rows
from .scenario import (RECORD_COLUMNS, SINR_POPULATION, ScenarioConfig, TrialRecord,
                       aggregate_rate_curve, empirical_cdf, record_row, sinr_samples)

RATE_CURVE_COLUMNS = ["estimator", "snr_db", "mean_rate_bits", "ci_half_width", "n"]
SINR_CDF_COLUMNS = ["beta", "sinr_db", "cdf"]


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    try:
        return fmt(value.item())
    except AttributeError:
        return str(value)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_rate_curve(path, records: Sequence[TrialRecord]):
    rows = [(c.label, c.snr_db, c.mean_rate_bits, c.ci_half_width, c.n)
            for c in aggregate_rate_curve(records)]
    _write_csv(Path(path), RATE_CURVE_COLUMNS, rows)
    return rows


def write_sinr_cdf(path, records: Sequence[TrialRecord], betas, snr_db):
    rows = []
    for beta in betas:
        samples = sinr_samples(records, beta, snr_db)
        if samples.size == 0:
            continue
        x, f = empirical_cdf(samples)
        rows.extend((beta, float(a), float(b)) for a, b in zip(x, f))
    _write_csv(Path(path), SINR_CDF_COLUMNS, rows)
    return rows


def write_records(path, records: Sequence[TrialRecord]):
    _write_csv(Path(path), RECORD_COLUMNS, (record_row(r) for r in records))


def write_codebook(path, cb: Codebook):
    _write_csv(Path(path), codebook_header(cb), codebook_rows(cb))


def plot_script(labels, betas) -> str:
    lines = [
        "# gnuplot script; run with: gnuplot plot.gp",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set terminal pngcairo size 900,600",
        "set output 'rate_curve.png'",
        "set xlabel 'SNR per UE antenna (dB)'",
        "set ylabel 'sum rate (bits/s/Hz)'",
        "set grid",
    ]
    series = [f"'rate_curve.csv' using 2:(strcol(1) eq '{lab}' ? $3 : 1/0) "
              f"with linespoints title '{lab}'" for lab in labels]
    lines.append("plot " + ", \\\n     ".join(series) if series else "# no rate curves")
    lines += [
        "set output 'sinr_cdf.png'",
        "set xlabel 'baseline SINR during training (dB)'",
        "set ylabel 'CDF'",
        "set yrange [0:1]",
    ]
    series = [f"'sinr_cdf.csv' using 2:($1 == {beta!r} ? $3 : 1/0) with steps title 'beta={beta:g}'"
              for beta in betas]
    lines.append("plot " + ", \\\n     ".join(series) if series else "# no SINR samples")
    return "\n".join(lines) + "\n"


@dataclass
class OutputBundle:
    rate_curve_csv: Path
    sinr_cdf_csv: Path
    records_csv: Path
    metadata: Dict
    metadata_json: Path
    plot_script: Path


def metadata_for(cfg: ScenarioConfig, threads: int) -> Dict:
    return {
        "config": cfg.to_dict(),
        "master_seed": cfg.master_seed,
        "version": f"mmbeam {__version__}",
        "threads": threads,
        "populations": {
            "rate_curve": "true sum rate of the pair each estimator chose, one sample per trial",
            "sinr_cdf": f"{SINR_POPULATION} at SNR {cfg.sinr_snr_db:g} dB",
        },
        "sinr_stream": "stream 1 (baseline data), pilot leakage through h12",
        "phbf1_data_symbols": "genie-known (ideal demodulation)",
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def write_bundle(out_dir, cfg: ScenarioConfig, records: Sequence[TrialRecord], threads: int = 1) -> OutputBundle:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rate_rows = write_rate_curve(out / "rate_curve.csv", records)
    sinr_rows = write_sinr_cdf(out / "sinr_cdf.csv", records, cfg.beta_list, cfg.sinr_snr_db)
    write_records(out / "records.csv", records)
    meta = metadata_for(cfg, threads)
    with open(out / "metadata.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    labels = list(dict.fromkeys(r[0] for r in rate_rows))
    betas = list(dict.fromkeys(r[0] for r in sinr_rows))
    (out / "plot.gp").write_text(plot_script(labels, betas), encoding="utf-8")
    return OutputBundle(out / "rate_curve.csv", out / "sinr_cdf.csv", out / "records.csv", meta,
                        out / "metadata.json", out / "plot.gp")
