# ==============================================================================
# FILE: exporter.py
# ROLE: Plot-Data Writer
# DESCRIPTION:
# Turns a ResultDocument into tab-separated plot files, one per figure:
# the signal, its increments, F_2(s), PDFs, structure functions, zeta_n,
# sigma(tau), rescaled PDFs (with the Levy curve) and moving-window stats.
# Every file starts with ONE '#' line naming the columns and their units.
# Numbers are printed with 9 significant digits, so the files are plain text
# that any plotting tool can read and that diff cleanly between runs.
# ==============================================================================

import os
import logging

import numpy as np

from errors import DomainError, NotComputedError
from series import compute_returns

logger = logging.getLogger(__name__)

NUMBER_FORMAT = ".9g"

EXPORTS = (
    "series", "returns", "fluctuation", "pdf", "pdf_micro", "pdf_macro",
    "structure", "zeta", "sigma", "rescaled_micro", "rescaled_macro", "rolling",
)


def _table(columns, rows):
    lines = ["# " + "\t".join(columns)]
    for row in rows:
        lines.append("\t".join(format(float(v), NUMBER_FORMAT) for v in row))
    return "\n".join(lines) + "\n"


def _section(document, stage):
    if stage not in document.payload:
        raise NotComputedError(f"the '{stage}' stage was not computed in this run", stage="export")
    return document.payload[stage]


def _need_series(document):
    if document.series is None:
        raise NotComputedError("the signal is not held in memory (document loaded without its series)",
                               stage="export")
    return document.series


def _pdf_files(prefix, entries, overlay=None):
    files = {}
    for entry in entries:
        if overlay is not None:
            columns = ["bin_center[sigma]", "density[1/sigma]", "levy_density[1/sigma]"]
            rows = zip(entry["bin_centers"], entry["density"], overlay)
        else:
            columns = ["bin_center[sigma]", "density[1/sigma]"]
            rows = zip(entry["bin_centers"], entry["density"])
        files[f"{prefix}_lag{entry['lag']}.tsv"] = _table(columns, rows)
    return files


# --- One builder per export ---
def _series(document):
    s = _need_series(document)
    return {"series.tsv": _table(["t[day]", "p[signal units]"], zip(s.timestamps, s.values))}


def _returns(document):
    s = _need_series(document)
    overlapping = document.payload.get("config", {}).get("overlapping", True)
    r = compute_returns(s, 1, overlapping)
    return {"returns_lag1.tsv": _table(["t[day]", "dp[signal units]"], zip(s.timestamps[1:], r.values))}


def _fluctuation(document):
    mf = _section(document, "mfdfa")
    match = np.flatnonzero(np.isclose(np.asarray(mf["orders"], dtype=float), 2.0))
    if match.size == 0:
        raise NotComputedError("F_2(s) needs q=2 in the MF-DFA order grid", stage="export")
    f2 = mf["f_values"][int(match[0])]
    return {"fluctuation.tsv": _table(["s[samples]", "F_2[signal units]"], zip(mf["scales"], f2))}


def _pdf(document):
    return _pdf_files("pdf", _section(document, "pdf"))


def _regime_pdf(regime):
    def build(document):
        return _pdf_files(f"pdf_{regime}", _section(document, "collapse")[regime]["pdfs"])
    return build


def _structure(document):
    st = _section(document, "structure")
    columns = ["tau[day]"] + [f"S^{float(n):g}[signal units^{float(n):g}]" for n in st["orders"]]
    rows = ([lag] + [row[j] for row in st["s_values"]] for j, lag in enumerate(st["lags"]))
    return {"structure.tsv": _table(columns, rows)}


def _zeta(document):
    st = _section(document, "structure")
    alpha = st["linear_alpha"]
    rows = ((n, z, e, alpha * n) for n, z, e in zip(st["orders"], st["zeta"], st["zeta_stderr"]))
    return {"zeta.tsv": _table(["n[order]", "zeta_n[1]", "stderr[1]", "linear_fit[1]"], rows)}


def _sigma(document):
    sg = _section(document, "sigma")
    return {"sigma.tsv": _table(["tau[day]", "sigma[signal units]"], zip(sg["lags"], sg["sigma"]))}


def _rescaled(regime):
    def build(document):
        entries = _section(document, "collapse")[regime]["rescaled"]
        overlay = None
        if regime == "micro":
            levy = document.payload.get("levy", {})
            if "overlay" in levy and len(levy["overlay"]["density"]) == len(entries[0]["bin_centers"]):
                overlay = levy["overlay"]["density"]
            else:
                logger.info("[Export] No Levy overlay available; rescaled micro PDFs exported without it")
        return _pdf_files(f"rescaled_{regime}", entries, overlay)
    return build


def _rolling(document):
    if document.rolling is None:
        raise NotComputedError("moving-window statistics were not computed", stage="export")
    files = {}
    for name in ("series", "returns"):
        rows = ((w.start, w.timestamp, w.mean, w.variance) for w in document.rolling[name])
        files[f"rolling_{name}.tsv"] = _table(
            ["start[index]", "t[day]", "mean[signal units]", "variance[signal units^2]"], rows
        )
    return files


BUILDERS = {
    "series": _series,
    "returns": _returns,
    "fluctuation": _fluctuation,
    "pdf": _pdf,
    "pdf_micro": _regime_pdf("micro"),
    "pdf_macro": _regime_pdf("macro"),
    "structure": _structure,
    "zeta": _zeta,
    "sigma": _sigma,
    "rescaled_micro": _rescaled("micro"),
    "rescaled_macro": _rescaled("macro"),
    "rolling": _rolling,
}


def export_plot_data(document, which):
    """
    Returns {file name: TSV text} for one export, or for every export the
    document can serve when `which` is "all".
    """
    if which == "all":
        files = {}
        for name in EXPORTS:
            try:
                files.update(BUILDERS[name](document))
            except NotComputedError as e:
                logger.debug(f"[Export] Skipping '{name}': {e.message}")
        return files

    if which not in BUILDERS:
        raise DomainError(f"unknown export '{which}', expected one of {', '.join(EXPORTS)}",
                          stage="export")
    return BUILDERS[which](document)


def write_plot_data(files, output_dir):
    os.makedirs(output_dir, exist_ok=True)
    for name in sorted(files):
        with open(os.path.join(output_dir, name), "w", encoding="utf-8", newline="\n") as f:
            f.write(files[name])
    logger.info(f"[Export] {len(files)} plot files written to {output_dir}")
