"""Score fusion, correlation metrics, logistic mapping, and the repeated
random-split evaluation protocol with its ablation runner."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize
from scipy.stats import rankdata

from .errors import DegenerateInput, InvalidArgument, MissingFeature, ShapeError
from .formats import DatasetManifest
from .pipeline import extract_stat_features
from .raster import load_image
from .regress import grid_search, scale_fit_transform, svr_predict, svr_train
from .semfeat import load_semantic_features
from .statfeat import GP_DIM, LBP_BINS, LP_DIM, MSCN_FEATURES, STAT_DIM

W_GRID = np.round(np.arange(0.0, 1.0 + 1e-9, 0.05), 2)

# feature-subset variants: slices into the 249-dim statistic vector
FEATURE_VARIANTS = {
    "GP1": (0, LBP_BINS),
    "GP2": (LBP_BINS, 2 * LBP_BINS),
    "GP3": (2 * LBP_BINS, GP_DIM),
    "GP": (0, GP_DIM),
    "LP1": (GP_DIM, GP_DIM + MSCN_FEATURES),
    "LP2": (GP_DIM + MSCN_FEATURES, STAT_DIM),
    "LP": (GP_DIM, STAT_DIM),
    "St": (0, STAT_DIM),
}
VARIANT_NAMES = tuple(FEATURE_VARIANTS) + ("Se", "All")


@dataclass(frozen=True)
class QualityScore:
    q_st: float
    q_se: float
    w: float
    q_overall: float


@dataclass(frozen=True)
class EvalReport:
    srocc: float
    plcc: float
    rmse: float
    logistic_params: tuple[float, float, float, float, float]
    n_splits: int
    aggregation: str = "median"
    split_mode: str = "content"
    per_repeat: tuple = ()  # (seed, srocc, plcc, rmse) rows


@dataclass(frozen=True)
class PipelineConfig:
    n_viewports: int = 6
    content_split: bool = True
    pooling: str = "feature"  # or "score"
    grid_folds: int = 5
    c_grid: tuple | None = None
    gamma_grid: tuple | None = None
    epsilon_grid: tuple | None = None


def fuse(q_st: float, q_se: float, w: float) -> QualityScore:
    """Weighted average of the two path scores."""
    if not (0.0 <= w <= 1.0):
        raise InvalidArgument(f"w={w} outside [0, 1]")
    return QualityScore(q_st=q_st, q_se=q_se, w=w,
                        q_overall=w * q_st + (1.0 - w) * q_se)


def _check_pair(pred, mos, min_len=3):
    pred = np.asarray(pred, dtype=np.float64).ravel()
    mos = np.asarray(mos, dtype=np.float64).ravel()
    if len(pred) != len(mos):
        raise ShapeError(f"length mismatch {len(pred)} vs {len(mos)}")
    if len(pred) < min_len:
        raise ShapeError(f"need at least {min_len} points")
    return pred, mos


def srocc(pred, mos) -> float:
    """Spearman rank correlation with average ranks for ties."""
    pred, mos = _check_pair(pred, mos)
    if np.ptp(pred) == 0 or np.ptp(mos) == 0:
        raise DegenerateInput("constant input to srocc")
    rp = rankdata(pred)
    rm = rankdata(mos)
    return float(np.corrcoef(rp, rm)[0, 1])


def _logistic(beta, x):
    b1, b2, b3, b4, b5 = beta
    return b1 * (0.5 - 1.0 / (1.0 + np.exp(np.clip(b2 * (x - b3), -500, 500)))) + b4 * x + b5


def logistic_fit(pred, mos):
    """5-parameter logistic least-squares fit; returns (params, mapped)."""
    pred, mos = _check_pair(pred, mos, min_len=10)
    if np.ptp(pred) == 0:
        raise DegenerateInput("constant predictions")
    beta0 = np.array([mos.max() - mos.min(), 1.0 / max(pred.std(), 1e-12),
                      pred.mean(), 0.0, mos.mean()])

    def sse(beta):
        return float(np.sum((_logistic(beta, pred) - mos) ** 2))

    res = minimize(sse, beta0, method="Nelder-Mead",
                   options={"maxiter": 10_000, "maxfev": 10_000,
                            "xatol": 1e-8, "fatol": 1e-8})
    beta = res.x
    # the best affine map is in the family (b1=0); never do worse than it
    a, b = np.polyfit(pred, mos, 1)
    affine = np.array([0.0, 1.0, 0.0, a, b])
    if sse(affine) < sse(beta):
        beta = affine
    return tuple(float(v) for v in beta), _logistic(beta, pred)


def plcc_rmse(mapped, mos) -> tuple[float, float]:
    """Pearson correlation and RMSE of (logistic-mapped) predictions."""
    mapped, mos = _check_pair(mapped, mos)
    if np.ptp(mapped) == 0 or np.ptp(mos) == 0:
        raise DegenerateInput("constant input to plcc")
    plcc = float(np.corrcoef(mapped, mos)[0, 1])
    rmse = float(np.sqrt(np.mean((mapped - mos) ** 2)))
    return plcc, rmse


# ----------------------------------------------------------------- protocol

@dataclass
class DatasetFeatures:
    """Features materialized once per manifest; shared across repeats."""
    mos: np.ndarray
    source_ids: list[str]
    stat: np.ndarray | None = None      # (n, d_st) pooled statistic features
    semantic: np.ndarray | None = None  # (n, 4096)
    semantic_tags: list[str] = field(default_factory=list)
    stat_per_viewport: np.ndarray | None = None  # (n, n_vp, d) for score pooling


def materialize_features(manifest: DatasetManifest, config: PipelineConfig,
                         need_stat: bool = True, need_semantic: bool = True) -> DatasetFeatures:
    mos = np.array([e.mos for e in manifest.entries])
    sources = [e.source_id for e in manifest.entries]
    ds = DatasetFeatures(mos=mos, source_ids=sources)
    if need_stat:
        pooled = config.pooling == "feature"
        feats = [extract_stat_features(load_image(manifest.resolve(e.image_path)),
                                       config.n_viewports, pooled=pooled)
                 for e in manifest.entries]
        if pooled:
            ds.stat = np.stack(feats)
        else:
            ds.stat_per_viewport = np.stack(feats)
            ds.stat = ds.stat_per_viewport.mean(axis=1)
    if need_semantic:
        sem, tags = [], []
        for e in manifest.entries:
            if e.semantic_feature_path is None:
                raise MissingFeature(f"{e.image_path}: no semantic feature file in manifest")
            v = load_semantic_features(manifest.resolve(e.semantic_feature_path))
            sem.append(v.fc1)
            tags.append(v.source_tag)
        ds.semantic = np.stack(sem)
        ds.semantic_tags = tags
    return ds


def _split_indices(rng, n: int, sources: list[str], content_split: bool):
    if content_split and len(set(sources)) >= 5:
        uniq = sorted(set(sources))
        perm = [uniq[i] for i in rng.permutation(len(uniq))]
        n_train = max(1, round(0.8 * len(uniq)))
        train_src = set(perm[:n_train])
        train = np.array([s in train_src for s in sources])
    else:
        perm = rng.permutation(n)
        n_train = max(1, round(0.8 * n))
        train = np.zeros(n, dtype=bool)
        train[perm[:n_train]] = True
    return train, ~train


def _train_path(x_train, y_train, x_test, config: PipelineConfig, seed: int):
    xs, params = scale_fit_transform(x_train)
    c, gamma, eps = grid_search(xs, y_train, folds=min(config.grid_folds, len(xs)),
                                seed=seed, c_grid=config.c_grid,
                                gamma_grid=config.gamma_grid,
                                epsilon_grid=config.epsilon_grid)
    model = svr_train(xs, y_train, c, gamma, eps, seed=seed, scaling=params)
    return svr_predict(model, x_train), svr_predict(model, x_test)


def _repeat_metrics(ds: DatasetFeatures, config: PipelineConfig, variant: str,
                    seed: int, repeat: int):
    rng = np.random.default_rng([seed, repeat])
    n = len(ds.mos)
    train, test = _split_indices(rng, n, ds.source_ids, config.content_split)
    y_tr, y_te = ds.mos[train], ds.mos[test]
    use_st = variant != "Se"
    use_se = variant in ("Se", "All")
    pred_tr = pred_te = None
    if use_st:
        lo, hi = FEATURE_VARIANTS[variant if variant in FEATURE_VARIANTS else "St"]
        x = ds.stat[:, lo:hi]
        st_tr, st_te = _train_path(x[train], y_tr, x[test], config, seed + repeat)
        pred_tr, pred_te = st_tr, st_te
    if use_se:
        se_tr, se_te = _train_path(ds.semantic[train], y_tr, ds.semantic[test],
                                   config, seed + repeat)
        pred_tr, pred_te = se_tr, se_te
    if variant == "All":
        best_w, best_s = 1.0, -np.inf
        for w in W_GRID:
            s = srocc(w * st_tr + (1 - w) * se_tr, y_tr)
            if s > best_s:
                best_s, best_w = s, float(w)
        pred_te = best_w * st_te + (1 - best_w) * se_te
    s = srocc(pred_te, y_te)
    beta, mapped = logistic_fit(pred_te, y_te)
    p, r = plcc_rmse(mapped, y_te)
    return s, p, r, beta


def run_protocol(manifest: DatasetManifest, config: PipelineConfig = PipelineConfig(),
                 n_repeats: int = 100, seed: int = 0, variant: str = "All",
                 features: DatasetFeatures | None = None) -> EvalReport:
    """Repeated seeded 80/20 splits; reports median SROCC/PLCC/RMSE."""
    if variant not in VARIANT_NAMES:
        raise InvalidArgument(f"unknown variant {variant!r}")
    if len(manifest.entries) < 10:
        raise InvalidArgument("manifest must contain at least 10 images")
    if features is None:
        features = materialize_features(manifest, config,
                                        need_stat=variant != "Se",
                                        need_semantic=variant in ("Se", "All"))
    rows = []
    betas = []
    for rep in range(n_repeats):
        s, p, r, beta = _repeat_metrics(features, config, variant, seed, rep)
        rows.append((seed + rep, s, p, r))
        betas.append(beta)
    sroccs = np.array([r[1] for r in rows])
    med_idx = int(np.argsort(sroccs, kind="stable")[len(sroccs) // 2])
    return EvalReport(
        srocc=float(np.median(sroccs)),
        plcc=float(np.median([r[2] for r in rows])),
        rmse=float(np.median([r[3] for r in rows])),
        logistic_params=betas[med_idx],
        n_splits=n_repeats,
        split_mode="content" if config.content_split else "image",
        per_repeat=tuple(rows),
    )


def run_ablation(manifest: DatasetManifest, config: PipelineConfig,
                 variants: list[str], n_repeats: int = 100,
                 seed: int = 0) -> dict[str, EvalReport]:
    """run_protocol per variant; variants may also be VP<n> (viewport count)
    or TAG:<source_tag> (semantic extractor check)."""
    feature_variants = []
    for v in variants:
        if v in VARIANT_NAMES or v.startswith("VP") or v.startswith("TAG:"):
            feature_variants.append(v)
        else:
            raise InvalidArgument(f"unknown variant {v!r}")
    reports: dict[str, EvalReport] = {}
    shared: DatasetFeatures | None = None
    for v in feature_variants:
        if v.startswith("VP"):
            n_vp = int(v[2:])
            cfg = replace(config, n_viewports=n_vp)
            reports[v] = run_protocol(manifest, cfg, n_repeats, seed, variant="St")
            continue
        if v.startswith("TAG:"):
            feats = materialize_features(manifest, config, need_stat=False)
            tag = v[4:]
            bad = {t for t in feats.semantic_tags if t != tag}
            if bad:
                raise InvalidArgument(f"manifest semantic features tagged {sorted(bad)}, expected {tag!r}")
            reports[v] = run_protocol(manifest, config, n_repeats, seed,
                                      variant="Se", features=feats)
            continue
        if shared is None:
            need_se = any(x in ("Se", "All") for x in feature_variants)
            shared = materialize_features(manifest, config, need_stat=True,
                                          need_semantic=need_se)
        reports[v] = run_protocol(manifest, config, n_repeats, seed,
                                  variant=v, features=shared)
    return reports


def format_report_table(reports: dict[str, EvalReport]) -> str:
    lines = [f"{'variant':<10} {'SROCC':>8} {'PLCC':>8} {'RMSE':>8}"]
    for name, r in reports.items():
        lines.append(f"{name:<10} {r.srocc:>8.4f} {r.plcc:>8.4f} {r.rmse:>8.4f}")
    return "\n".join(lines)
