"""
==============================================================================
FILE: pipeline.py
ROLE: The Orchestrator
DESCRIPTION:
Runs the analysis end to end on one signal:
    ingest / generate -> optional Fourier detrend -> returns -> statistics
    -> MF-DFA -> structure functions -> PDFs -> collapse -> Levy fit
and packages everything into a ResultDocument (canonical, key-sorted JSON).
The orchestrator itself is single-threaded; only the MF-DFA scales and the
Levy overlay grid are fanned out to worker threads. Any module error aborts
the run and carries the name of the stage it escaped from.
==============================================================================
"""

import os
import json
import hashlib
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field, fields

import numpy as np

import collapse as pdf_collapse
import levy
import mfdfa
import structure
from config import TOOL_VERSION
from exporter import export_plot_data, write_plot_data
from errors import ConfigError, NonDecayingPeakError, ScaleKitError, StabilityViolationError, from_foreign
from fdetrend import DetrendConfig, fourier_detrend
from ingest import ingest_csv
from series import Series, compute_returns, expanding_variance, rolling_stats, summary_stats
from synth import GenSpec, gen_series

logger = logging.getLogger(__name__)

STAGES = ("stats", "mfdfa", "structure", "pdf", "collapse", "levy")

DEFAULT_STRUCTURE_LAGS = (1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 25, 30, 40, 50, 60, 80, 100, 120, 150, 200)


def _tuple(value, cast):
    if value is None:
        return None
    return tuple(cast(v) for v in value)


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on. `output_dir` and `workers` never change the results."""
    input_path: str = None
    generator: str = None
    length: int = None
    gen_params: dict = field(default_factory=dict)
    seed: int = None
    overlapping: bool = True

    detrend_modes: int = 0
    detrend_remove_mean: bool = False
    rolling_window: int = 250
    rolling_step: int = 25

    pdf_lags: tuple = (1, 20, 60, 200)

    mfdfa_input: str = "returns"
    scales: tuple = None
    scale_count: int = 20
    scale_min: int = 10
    q_orders: tuple = mfdfa.DEFAULT_ORDERS
    q_zero: bool = False
    poly_order: int = 1
    mfdfa_fit_range: tuple = mfdfa.DEFAULT_FIT_RANGE
    break_threshold: float = 0.1

    structure_lags: tuple = DEFAULT_STRUCTURE_LAGS
    n_orders: tuple = structure.DEFAULT_ORDERS
    zeta_fit_range: tuple = structure.DEFAULT_FIT_RANGE
    nonlinearity_threshold: float = 0.05

    bin_count: int = None
    support_quantile: float = 0.99
    micro_lags: tuple = (1, 2, 4, 8)
    macro_lags: tuple = (30, 60, 120, 200)
    collapse_alpha: float = None
    collapse_threshold: float = pdf_collapse.DEFAULT_THRESHOLD
    central_sigmas: float = pdf_collapse.DEFAULT_CENTRAL_SIGMAS
    min_bin_count: int = pdf_collapse.DEFAULT_MIN_COUNT

    levy_lags: tuple = tuple(range(1, 11))
    levy_boundary_tolerance: float = levy.DEFAULT_BOUNDARY_TOLERANCE

    output_dir: str = field(default=None, compare=False)
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        # Normalize sequences so a config rebuilt from JSON lists compares equal
        normalize = {
            "pdf_lags": int, "scales": int, "q_orders": float, "mfdfa_fit_range": float,
            "structure_lags": int, "n_orders": float, "zeta_fit_range": float,
            "micro_lags": int, "macro_lags": int, "levy_lags": int,
        }
        for name, cast in normalize.items():
            object.__setattr__(self, name, _tuple(getattr(self, name), cast))
        object.__setattr__(self, "gen_params", dict(self.gen_params or {}))
        self.validate()

    def validate(self):
        if (self.input_path is None) == (self.generator is None):
            raise ConfigError("a run needs exactly one source: an input file or a generator")
        if self.generator is not None and self.seed is None:
            raise ConfigError("--seed is mandatory for generator runs")

        for name in ("pdf_lags", "q_orders", "structure_lags", "n_orders", "micro_lags", "macro_lags", "levy_lags"):
            if not getattr(self, name):
                raise ConfigError(f"'{name}' must not be empty")
        for name in ("pdf_lags", "structure_lags", "micro_lags", "macro_lags", "levy_lags"):
            if min(getattr(self, name)) < 1:
                raise ConfigError(f"'{name}' must hold lags >= 1")
        if self.mfdfa_input not in ("returns", "series"):
            raise ConfigError(f"'mfdfa_input' must be 'returns' or 'series', got {self.mfdfa_input!r}")
        if self.scales is not None and (not self.scales or np.any(np.diff(self.scales) <= 0)):
            raise ConfigError("'scales' must be a non-empty, strictly increasing grid")
        if 0.0 in self.q_orders and not self.q_zero:
            raise ConfigError("q = 0 needs the logarithmic q=0 mode (q_zero)")
        if min(self.n_orders) <= 0:
            raise ConfigError("structure-function orders must be > 0")
        for name in ("mfdfa_fit_range", "zeta_fit_range"):
            lo, hi = getattr(self, name)
            if not 0 < lo < hi:
                raise ConfigError(f"'{name}' must satisfy 0 < lo < hi, got ({lo}, {hi})")
        if len(self.micro_lags) < 2 or len(self.macro_lags) < 2:
            raise ConfigError("each collapse regime needs at least 2 lags")
        if len(self.levy_lags) < 3:
            raise ConfigError("the peak-scaling fit needs at least 3 lags")
        if not 0.0 < self.support_quantile <= 1.0:
            raise ConfigError(f"'support_quantile' must be in (0, 1], got {self.support_quantile}")
        if self.poly_order < 0:
            raise ConfigError(f"'poly_order' must be >= 0, got {self.poly_order}")
        if self.rolling_window < 2 or self.rolling_step < 1:
            raise ConfigError("rolling window must be >= 2 and its step >= 1")

    def to_dict(self):
        """The config echo: every field that can change the results."""
        echo = {}
        for f in fields(self):
            if not f.compare:
                continue
            value = getattr(self, f.name)
            echo[f.name] = list(value) if isinstance(value, tuple) else value
        return echo

    @classmethod
    def from_dict(cls, data, **runtime):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**{**data, **runtime})


@dataclass(eq=False)
class ResultDocument:
    """
    `payload` is what gets written as JSON. `series` and `rolling` stay in
    memory for the plot exports only.
    """
    payload: dict
    series: Series = None
    rolling: dict = None

    def has(self, stage):
        return stage in self.payload

    def to_json(self):
        return json.dumps(_plain(self.payload), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def write(self, output_dir):
        os.makedirs(output_dir, exist_ok=True)
        target = os.path.join(output_dir, "result.json")
        with open(target, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_json())
        logger.info(f"[Export] Result document written to {target}")
        write_plot_data(export_plot_data(self, "all"), output_dir)


def _plain(value):
    """numpy scalars and arrays down to JSON-native types."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _pdf_dict(pdf, with_reference=False):
    entry = {
        "lag": pdf.lag,
        "bin_centers": pdf.bin_centers,
        "density": pdf.density,
        "normalization": pdf.normalization,
        "sample_count": pdf.sample_count,
        "sample_std": pdf.sample_std,
        "coverage": pdf.coverage,
    }
    if with_reference:
        entry["gaussian"] = pdf_collapse.gaussian_reference(pdf)
    return entry


@contextmanager
def _stage(name):
    logger.info(f"--- {name} Stage Started ---")
    try:
        yield
    except ScaleKitError as e:
        if e.stage is None:
            e.stage = name
        raise
    except Exception as e:
        raise from_foreign(e, name) from e


class Pipeline:
    """One run over one signal. Stage methods fill `self.payload` in order."""

    def __init__(self, config):
        self.config = config
        self.payload = {"tool_version": TOOL_VERSION, "config": config.to_dict()}
        self.series = None
        self.rolling = None
        self._returns = {}
        self._sigma_alpha = None

    # --------------------------------------------------------------------------
    # Helpers
    # --------------------------------------------------------------------------
    def returns(self, lag):
        if lag not in self._returns:
            self._returns[lag] = compute_returns(self.series, int(lag), self.config.overlapping)
        return self._returns[lag]

    @staticmethod
    def resolve(stages):
        """Requested stages plus whatever they depend on, in run order."""
        wanted = set(STAGES if stages is None else stages)
        unknown = wanted - set(STAGES)
        if unknown:
            raise ConfigError(f"unknown stage(s): {', '.join(sorted(unknown))}")
        return [s for s in STAGES if s in wanted]

    # --------------------------------------------------------------------------
    # Stages
    # --------------------------------------------------------------------------
    def load(self):
        cfg = self.config
        with _stage("ingest"):
            if cfg.input_path is not None:
                series = ingest_csv(cfg.input_path)
                with open(cfg.input_path, "rb") as f:
                    digest = hashlib.sha256(f.read()).hexdigest()
                source = {"kind": "file", "path": cfg.input_path}
            else:
                spec = GenSpec(cfg.generator, cfg.length, cfg.seed, cfg.gen_params)
                series = gen_series(spec)
                digest = hashlib.sha256(series.values.astype("<f8").tobytes()).hexdigest()
                source = {"kind": "generator", "spec": spec.as_dict()}

        with _stage("detrend"):
            detrend = DetrendConfig(cfg.detrend_modes, cfg.detrend_remove_mean)
            series = fourier_detrend(series, detrend)

        self.series = series
        self.payload["input"] = {**source, "sha256": digest, "length": len(series), "label": series.label}

    def run_stats(self):
        cfg = self.config
        with _stage("stats"):
            n = len(self.series)
            lags = sorted(set((1,) + cfg.pdf_lags))
            self.payload["stats"] = {
                "series": summary_stats(self.series.values).as_dict(),
                "returns": [{"lag": lag, **summary_stats(self.returns(lag).values).as_dict()} for lag in lags],
            }

            # Moving windows over the signal and over its lag-1 increments
            window = min(cfg.rolling_window, n - 1)
            increments = Series.from_values(self.returns(1).values, label="returns")
            on_series = rolling_stats(self.series, window, cfg.rolling_step)
            on_returns = rolling_stats(increments, window, cfg.rolling_step)
            self.rolling = {"window": window, "series": on_series, "returns": on_returns}

            sizes = np.unique(np.geomspace(16, len(increments), 12).astype(np.int64))
            sizes = sizes[sizes >= 2]
            self.payload["stats"]["rolling"] = {
                "window": window,
                "step": cfg.rolling_step,
                "count": len(on_series),
                "series_variance_range": [min(w.variance for w in on_series), max(w.variance for w in on_series)],
                "returns_variance_range": [min(w.variance for w in on_returns), max(w.variance for w in on_returns)],
            }
            self.payload["stats"]["expanding_variance"] = {
                "series": expanding_variance(self.series, sizes),
                "returns": expanding_variance(increments, sizes),
            }
            r1 = self.payload["stats"]["returns"][0]
            logger.info(
                f"[Stats] lag-1 returns: mean={r1['mean']:.6g}, std={r1['std_dev']:.6g}, "
                f"skew={r1['skewness']:.4f}, kurtosis={r1['kurtosis']:.4f}"
            )

    def run_mfdfa(self):
        cfg = self.config
        with _stage("mfdfa"):
            if cfg.mfdfa_input == "series":
                values = self.series.values
            else:
                values = self.returns(1).values
            if cfg.scales is None:
                scales = mfdfa.default_scales(values.size, cfg.scale_count, cfg.scale_min)
            else:
                scales = np.asarray(cfg.scales, dtype=np.int64)
            surface = mfdfa.mfdfa_surface(values, scales, cfg.q_orders, cfg.poly_order,
                                          log_mode=cfg.q_zero, workers=cfg.workers)
            exponents = mfdfa.fit_exponents(surface, cfg.mfdfa_fit_range)

            knee = None
            if surface.scales.size >= 8 and np.any(np.isclose(surface.orders, 2.0)):
                knee = mfdfa.detect_scaling_break(surface, 2.0, cfg.break_threshold)
            else:
                logger.info("[MF-DFA] Scaling-break detection skipped (needs q=2 and at least 8 scales)")

            result = {
                "scales": surface.scales,
                "orders": surface.orders,
                "f_values": surface.f_values,
                "segments_per_scale": surface.segments_per_scale,
                "poly_order": surface.poly_order,
                "alpha": exponents.alpha,
                "stderr": exponents.stderr,
                "fit_range": list(exponents.fit_range),
                "mass_exponents": exponents.mass_exponents(),
                "scaling_break": knee,
            }
            if np.any(np.isclose(exponents.orders, 2.0)):
                result["hurst"] = exponents.hurst
            if np.count_nonzero(exponents.orders > 0) >= 3:
                verdict = structure.multifractality_test(mfdfa.zeta_from_mfdfa(exponents), cfg.nonlinearity_threshold)
                result["verdict"] = _verdict_dict(verdict)
            self.payload["mfdfa"] = result

    def run_structure(self):
        cfg = self.config
        with _stage("structure"):
            sset = structure.structure_set(self.series, cfg.structure_lags, cfg.n_orders, cfg.overlapping)
            zeta = structure.fit_zeta(sset, cfg.zeta_fit_range)
            verdict = structure.multifractality_test(zeta, cfg.nonlinearity_threshold)
            sigma = structure.sigma_tau([self.returns(lag) for lag in sset.lags], cfg.zeta_fit_range)
            self._sigma_alpha = sigma.alpha

            self.payload["structure"] = {
                "lags": sset.lags,
                "orders": sset.orders,
                "s_values": sset.s_values,
                "zeta": zeta.zeta,
                "zeta_stderr": zeta.stderr,
                "fit_range": list(zeta.fit_range),
                "linear_alpha": zeta.linear_alpha,
                "nonlinearity": zeta.nonlinearity,
                "verdict": _verdict_dict(verdict),
            }
            self.payload["sigma"] = {
                "lags": sigma.lags,
                "sigma": sigma.sigma,
                "alpha": sigma.alpha,
                "stderr": sigma.stderr,
                "fit_range": list(sigma.fit_range),
            }
            logger.info(f"[Structure] Verdict: {verdict.verdict.value} (nonlinearity {verdict.nonlinearity:.4f})")

    def run_pdf(self):
        cfg = self.config
        with _stage("pdf"):
            entries = []
            for lag in sorted(cfg.pdf_lags):
                pdf = pdf_collapse.estimate_pdf(self.returns(lag), cfg.bin_count)
                entries.append(_pdf_dict(pdf, with_reference=True))
            self.payload["pdf"] = entries
            logger.info(f"[PDF] Estimated PDFs at lags {sorted(cfg.pdf_lags)}")

    def run_collapse(self):
        cfg = self.config
        with _stage("collapse"):
            if cfg.collapse_alpha is not None:
                alpha, source = float(cfg.collapse_alpha), "config"
            else:
                alpha, source = self._sigma_alpha, "sigma_fit"

            section = {}
            for regime, lags in (("micro", cfg.micro_lags), ("macro", cfg.macro_lags)):
                estimated = pdf_collapse.regime_pdfs(
                    [self.returns(lag) for lag in lags], alpha, cfg.support_quantile, cfg.bin_count
                )
                report = pdf_collapse.collapse(estimated, alpha, None, cfg.collapse_threshold,
                                               cfg.central_sigmas, cfg.min_bin_count)
                reference = estimated[0]
                section[regime] = {
                    **report.as_dict(),
                    "alpha_source": source,
                    "pdfs": [_pdf_dict(p) for p in estimated],
                    "rescaled": [
                        _pdf_dict(pdf_collapse.rescale_pdf(p, alpha, p.lag / reference.lag)) for p in estimated
                    ],
                }
                logger.info(f"[Collapse] {regime} regime {sorted(lags)}: collapsed={report.collapsed}")
            self.payload["collapse"] = section

    def run_levy(self):
        cfg = self.config
        with _stage("levy"):
            peak_pdfs = pdf_collapse.regime_pdfs(
                [self.returns(lag) for lag in cfg.levy_lags], 0.0, cfg.support_quantile, cfg.bin_count
            )
            try:
                fit = levy.fit_mu_from_peaks(peak_pdfs, None, cfg.levy_boundary_tolerance)
            except (StabilityViolationError, NonDecayingPeakError) as e:
                # A rejected fit is a finding, not a crash
                logger.warning(f"[Levy] Peak-scaling fit rejected: {e.message}")
                self.payload["levy"] = {
                    "status": "rejected",
                    "error": type(e).__name__,
                    "message": e.message,
                    "raw_slope": e.raw_slope,
                }
                return

            result = {"status": "ok", **fit.as_dict()}
            micro = self.payload.get("collapse", {}).get("micro")
            if micro is not None:
                reference = micro["pdfs"][0]
                model = levy.LevyModel(fit.mu_hat, fit.gamma_hat, delta_s=reference["lag"])
                result["overlay"] = {
                    "lag": reference["lag"],
                    "normalization": reference["normalization"],
                    "x": reference["bin_centers"],
                    "density": levy.levy_overlay(model, reference["bin_centers"], reference["normalization"],
                                                 workers=cfg.workers),
                }
            self.payload["levy"] = result

    def run(self, stages=None):
        order = self.resolve(stages)
        if "collapse" in order and self.config.collapse_alpha is None and "structure" not in order:
            order = self.resolve(set(order) | {"structure"})

        self.load()
        self.payload["stages"] = order
        for stage in order:
            getattr(self, f"run_{stage}")()
        return ResultDocument(self.payload, self.series, self.rolling)


def _verdict_dict(verdict):
    return {
        "verdict": verdict.verdict.value,
        "nonlinearity": verdict.nonlinearity,
        "strictly_increasing": verdict.strictly_increasing,
        "threshold": verdict.threshold,
    }


def run_pipeline(config, stages=None):
    """Runs the requested stages and writes the outputs when an output directory is set."""
    logger.info("--- ScaleKit Run Started ---")
    document = Pipeline(config).run(stages)
    if config.output_dir:
        with _stage("export"):
            document.write(config.output_dir)
    logger.info("--- ScaleKit Run Finished ---")
    return document
