"""End-to-end pipeline assembly: config, preprocessing, persistence, scoring.

The full chain for the learned-feature pipeline is

    filter (validity + TNH cutoff)
    -> mean-normalize each profile
    -> per-channel min-max rescale to [0, 1]   (stats fitted on training data)
    -> SDAE feature extraction (27 -> 30 -> 12 by default)
    -> weighted ELM score in [0, 1]

The hand-crafted baseline swaps the middle for the 12 classic profile
statistics, min-max rescaled the same way so the ELM sees comparable inputs
in both pipelines.

A fitted chain is persisted as a single versioned JSON document
(:class:`ModelBundle`): human-readable, diffable, and loaded back with
full-precision floats so reloaded models score bit-for-bit identically.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from ._ioutil import atomic_write_text
from ._rng import derive_seed, make_rng
from .dae import Corruption, DaeConfig
from .elm import ElmModel, class_weights, fit_elm, init_elm, score
from .features_hand import hand_feature_matrix
from .profiles import TcRecord, filter_records, mean_normalize
from .sdae import EncoderLayer, SdaeModel, default_layer_configs, extract, train_sdae

FORMAT_VERSION = 1

# Stream tags for deriving independent per-stage seeds from one master seed.
_STREAM_SDAE = 1
_STREAM_ELM = 2

_INPUT_SCALING_NOTE = (
    "mean-normalized profile, per-channel min-max rescaled to [0,1]"
)
_WEIGHTING_NOTE = "balanced per-sample weights w = N / (2 * N_class)"


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of the pipeline, flat and file-round-trippable.

    Defaults reproduce the reference setup: masking noise at rate 0.2,
    learning rate 0.02, momentum 0.5, 200 epochs, SDAE widths 30 and 12,
    a 1000-neuron weighted ELM, and 10 runs of 5-fold CV.
    """

    tnh_min: float = 95.0
    sdae_widths: tuple[int, ...] = (30, 12)
    corruption_kind: str = "masking"
    corruption_rate: float = 0.2
    gaussian_sigma: float = 0.0
    decoder_activation: str = "linear"
    loss_kind: str = "squared"
    learning_rate: float = 0.02
    momentum: float = 0.5
    epochs: int = 200
    batch_size: int = 32
    weight_decay: float = 0.0
    n_hidden: int = 1000
    ridge: float = 1e-6
    weighted: bool = True
    folds: int = 5
    runs: int = 10
    sdae_scope: str = "global"
    seed: int = 7

    def __post_init__(self) -> None:
        if self.sdae_scope not in ("global", "per-fold"):
            raise ValueError("sdae_scope must be 'global' or 'per-fold'")
        if len(self.sdae_widths) == 0:
            raise ValueError("sdae_widths must name at least one layer")

    def layer_configs(self, d_in: int) -> list[DaeConfig]:
        """Chained per-layer DAE configs for input dimension ``d_in``."""
        template = DaeConfig(
            d_in=d_in,
            d_hidden=int(self.sdae_widths[0]),
            decoder_activation=self.decoder_activation,
            loss_kind=self.loss_kind,
            corruption=Corruption(
                kind=self.corruption_kind,
                rate=self.corruption_rate,
                sigma=self.gaussian_sigma,
            ),
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            epochs=self.epochs,
            batch_size=self.batch_size,
            weight_decay=self.weight_decay,
            seed=self.seed,
        )
        return default_layer_configs(d_in, self.sdae_widths, template)

    # -- flat key=value serialization ------------------------------------

    def to_items(self) -> dict[str, str]:
        """Canonical flat representation (also hashed for provenance)."""
        return {
            "preprocessing.tnh_min": repr(self.tnh_min),
            "sdae.widths": ",".join(str(w) for w in self.sdae_widths),
            "dae.corruption_kind": self.corruption_kind,
            "dae.corruption_rate": repr(self.corruption_rate),
            "dae.gaussian_sigma": repr(self.gaussian_sigma),
            "dae.decoder_activation": self.decoder_activation,
            "dae.loss_kind": self.loss_kind,
            "dae.learning_rate": repr(self.learning_rate),
            "dae.momentum": repr(self.momentum),
            "dae.epochs": str(self.epochs),
            "dae.batch_size": str(self.batch_size),
            "dae.weight_decay": repr(self.weight_decay),
            "elm.n_hidden": str(self.n_hidden),
            "elm.ridge": repr(self.ridge),
            "elm.weighted": "true" if self.weighted else "false",
            "eval.folds": str(self.folds),
            "eval.runs": str(self.runs),
            "eval.sdae_scope": self.sdae_scope,
            "seed": str(self.seed),
        }

    @classmethod
    def from_items(cls, items: Mapping[str, str]) -> "PipelineConfig":
        """Inverse of :meth:`to_items`; unknown keys raise."""
        cfg = cls()
        fields_by_key: dict[str, tuple[str, Callable[[str], object]]] = {
            "preprocessing.tnh_min": ("tnh_min", float),
            "sdae.widths": (
                "sdae_widths",
                lambda v: tuple(int(p) for p in v.split(",") if p.strip()),
            ),
            "dae.corruption_kind": ("corruption_kind", str),
            "dae.corruption_rate": ("corruption_rate", float),
            "dae.gaussian_sigma": ("gaussian_sigma", float),
            "dae.decoder_activation": ("decoder_activation", str),
            "dae.loss_kind": ("loss_kind", str),
            "dae.learning_rate": ("learning_rate", float),
            "dae.momentum": ("momentum", float),
            "dae.epochs": ("epochs", int),
            "dae.batch_size": ("batch_size", int),
            "dae.weight_decay": ("weight_decay", float),
            "elm.n_hidden": ("n_hidden", int),
            "elm.ridge": ("ridge", float),
            "elm.weighted": ("weighted", _parse_bool),
            "eval.folds": ("folds", int),
            "eval.runs": ("runs", int),
            "eval.sdae_scope": ("sdae_scope", str),
            "seed": ("seed", int),
        }
        updates: dict[str, object] = {}
        for key, raw in items.items():
            if key not in fields_by_key:
                raise ValueError(f"unknown config key {key!r}")
            name, convert = fields_by_key[key]
            try:
                updates[name] = convert(raw)
            except ValueError as exc:
                raise ValueError(f"config key {key!r}: {exc}") from None
        return replace(cfg, **updates)

    def config_hash(self) -> str:
        text = "\n".join(f"{k}={v}" for k, v in sorted(self.to_items().items()))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"cannot parse {raw!r} as a boolean")


def read_config_file(path: str) -> dict[str, str]:
    """Parse a flat ``key=value`` config file; ``#`` starts a comment."""
    items: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(
                    f"{path}:{lineno}: expected key=value, got {stripped!r}"
                )
            key, value = stripped.split("=", 1)
            items[key.strip()] = value.strip()
    return items


# ---------------------------------------------------------------------------
# Preprocessing


@dataclass
class RescaleStats:
    """Per-channel min/max fitted on training profiles."""

    channel_min: np.ndarray
    channel_max: np.ndarray

    def __post_init__(self) -> None:
        self.channel_min = np.asarray(self.channel_min, dtype=np.float64)
        self.channel_max = np.asarray(self.channel_max, dtype=np.float64)
        if self.channel_min.shape != self.channel_max.shape:
            raise ValueError("channel_min/channel_max shapes differ")

    @classmethod
    def fit(cls, rows: np.ndarray) -> "RescaleStats":
        rows = np.atleast_2d(rows)
        if rows.shape[0] == 0:
            raise ValueError("cannot fit rescale stats on zero rows")
        return cls(rows.min(axis=0), rows.max(axis=0))

    def transform(self, rows: np.ndarray) -> np.ndarray:
        """Affine map to [0,1], clamped; zero-range channels map to 0.5."""
        rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        span = self.channel_max - self.channel_min
        safe = np.where(span > 0.0, span, 1.0)
        out = np.clip((rows - self.channel_min) / safe, 0.0, 1.0)
        out[:, span == 0.0] = 0.5
        return out


def profile_rows(records: Sequence[TcRecord]) -> np.ndarray:
    """Stack mean-normalized profiles into an (n, n_tc) matrix."""
    if len(records) == 0:
        raise ValueError("no records to preprocess")
    return np.stack([mean_normalize(r.tc_temps) for r in records])


def preprocess(
    records: Sequence[TcRecord],
    tnh_min: float = 95.0,
    fitted_stats: RescaleStats | None = None,
) -> tuple[list[TcRecord], np.ndarray, RescaleStats]:
    """Filter, normalize, and rescale records into an SDAE-ready matrix.

    With ``fitted_stats=None`` the min-max stats are fitted on these records
    (training use); otherwise the given stats are applied unchanged — any
    non-training application must pass the stats fitted at training time, so
    test data can never influence the scaling.

    Returns:
        (kept records, matrix of shape (n_kept, n_tc) in [0,1], stats used).
    """
    kept = filter_records(records, tnh_min)
    if not kept:
        raise ValueError("no records survive filtering")
    rows = profile_rows(kept)
    stats = RescaleStats.fit(rows) if fitted_stats is None else fitted_stats
    return kept, stats.transform(rows), stats


def record_targets(records: Sequence[TcRecord]) -> np.ndarray:
    """{0,1} targets from record labels; unlabeled records raise."""
    out = np.empty(len(records), dtype=np.intp)
    for i, rec in enumerate(records):
        if rec.label == "normal":
            out[i] = 0
        elif rec.label == "event":
            out[i] = 1
        else:
            raise ValueError(f"record {i} is unlabeled")
    return out


# ---------------------------------------------------------------------------
# Model bundle


@dataclass
class ModelBundle:
    """Everything needed to score new records, plus provenance.

    ``provenance['timestamp']`` is the data vintage — the latest timestamp
    among the training records — rather than wall-clock time, so identical
    training inputs produce identical bundle files.
    """

    tnh_min: float
    stats: RescaleStats
    sdae: SdaeModel
    elm: ElmModel
    weighted: bool
    provenance: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION


def fit_unsupervised(
    records: Sequence[TcRecord],
    config: PipelineConfig,
    seed: int,
    loss_log: list[np.ndarray] | None = None,
) -> tuple[RescaleStats, SdaeModel]:
    """Fit the unsupervised half: rescale stats + SDAE on the normal pool.

    Stats are fitted on all retained records; the SDAE trains on the
    normal-labeled subset only (events must not shape the representation).
    """
    kept, matrix, stats = preprocess(records, config.tnh_min)
    normal_mask = np.array([r.label == "normal" for r in kept])
    pool = matrix[normal_mask]
    if pool.shape[0] == 0:
        raise ValueError("no normal-labeled records to train the SDAE on")
    model = train_sdae(
        pool,
        config.layer_configs(matrix.shape[1]),
        make_rng(derive_seed(seed, _STREAM_SDAE)),
        loss_log=loss_log,
    )
    return stats, model


def _fit_elm_on_features(
    features: np.ndarray,
    targets: np.ndarray,
    config: PipelineConfig,
    rng: np.random.Generator,
) -> ElmModel:
    model = init_elm(features.shape[1], config.n_hidden, rng, config.ridge)
    weights = class_weights(targets) if config.weighted else None
    return fit_elm(model, features, targets, weights)


def train_bundle(
    records: Sequence[TcRecord],
    config: PipelineConfig,
    loss_log: list[np.ndarray] | None = None,
) -> ModelBundle:
    """Train the full learned-feature chain on labeled records.

    Uses ``config.seed`` for everything; two calls with identical records
    and config produce bundles that serialize to identical bytes.
    """
    stats, sdae_model = fit_unsupervised(records, config, config.seed, loss_log)
    kept, matrix, _ = preprocess(records, config.tnh_min, stats)
    targets = record_targets(kept)
    features = extract(matrix, sdae_model)
    elm_model = _fit_elm_on_features(
        features, targets, config, make_rng(derive_seed(config.seed, _STREAM_ELM))
    )
    vintage = max(r.timestamp for r in kept)
    return ModelBundle(
        tnh_min=config.tnh_min,
        stats=stats,
        sdae=sdae_model,
        elm=elm_model,
        weighted=config.weighted,
        provenance={
            "config_hash": config.config_hash(),
            "seed": config.seed,
            "timestamp": vintage,
        },
    )


def learned_features(
    bundle: ModelBundle, records: Sequence[TcRecord]
) -> tuple[list[TcRecord], np.ndarray]:
    """Retained records and their SDAE feature rows under a trained bundle."""
    kept, matrix, _ = preprocess(records, bundle.tnh_min, bundle.stats)
    return kept, extract(matrix, bundle.sdae)


def score_records(
    bundle: ModelBundle, records: Sequence[TcRecord]
) -> tuple[list[TcRecord], np.ndarray]:
    """Scores in [0,1] for every retained record, using stored stats only."""
    kept, features = learned_features(bundle, records)
    return kept, score(features, bundle.elm)


def save_model(bundle: ModelBundle, path: str) -> None:
    """Serialize a bundle as one sorted-key JSON document (atomic write)."""
    doc = {
        "format_version": bundle.format_version,
        "preprocessing": {
            "tnh_min": bundle.tnh_min,
            "channel_min": bundle.stats.channel_min.tolist(),
            "channel_max": bundle.stats.channel_max.tolist(),
            "input_scaling": _INPUT_SCALING_NOTE,
        },
        "sdae": {
            "layers": [
                {"weights": layer.weights.tolist(), "bias": layer.bias.tolist()}
                for layer in bundle.sdae.layers
            ]
        },
        "elm": {
            "w_in": bundle.elm.w_in.tolist(),
            "bias": bundle.elm.bias.tolist(),
            "beta": None if bundle.elm.beta is None else bundle.elm.beta.tolist(),
            "ridge": bundle.elm.ridge,
            "sample_weighting": _WEIGHTING_NOTE if bundle.weighted else "none",
        },
        "provenance": bundle.provenance,
    }
    atomic_write_text(path, json.dumps(doc, sort_keys=True) + "\n")


def load_model(path: str) -> ModelBundle:
    """Load a bundle; fails loudly on version drift or a mangled file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not a valid model file ({exc})") from None
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise ValueError(f"{path}: not a model bundle (no format_version)")
    version = doc["format_version"]
    if version != FORMAT_VERSION:
        raise ValueError(
            f"{path}: model format version {version}, "
            f"but this build reads version {FORMAT_VERSION}"
        )
    try:
        pre = doc["preprocessing"]
        stats = RescaleStats(
            channel_min=np.asarray(pre["channel_min"], dtype=np.float64),
            channel_max=np.asarray(pre["channel_max"], dtype=np.float64),
        )
        layers = [
            EncoderLayer(
                weights=np.asarray(layer["weights"], dtype=np.float64),
                bias=np.asarray(layer["bias"], dtype=np.float64),
            )
            for layer in doc["sdae"]["layers"]
        ]
        elm_doc = doc["elm"]
        elm_model = ElmModel(
            w_in=np.asarray(elm_doc["w_in"], dtype=np.float64),
            bias=np.asarray(elm_doc["bias"], dtype=np.float64),
            ridge=float(elm_doc["ridge"]),
            beta=None if elm_doc["beta"] is None
            else np.asarray(elm_doc["beta"], dtype=np.float64),
        )
        bundle = ModelBundle(
            tnh_min=float(pre["tnh_min"]),
            stats=stats,
            sdae=SdaeModel(layers=layers),
            elm=elm_model,
            weighted=elm_doc.get("sample_weighting") != "none",
            provenance=dict(doc.get("provenance", {})),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: truncated or malformed model file "
                         f"(missing {exc})") from None
    return bundle


# ---------------------------------------------------------------------------
# Train-and-score procedures for the CV harness


def _minmax_scores(
    train_features: np.ndarray,
    test_features: np.ndarray,
    train_targets: np.ndarray,
    config: PipelineConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    stats = RescaleStats.fit(train_features)
    model = _fit_elm_on_features(
        stats.transform(train_features), train_targets, config, rng
    )
    return np.asarray(score(stats.transform(test_features), model))


def make_hand_pipeline(config: PipelineConfig):
    """Train-and-score procedure over the 12 hand-crafted features.

    Features are min-max rescaled to [0,1] with stats fitted on the training
    fold (raw DWATT magnitudes would saturate the sigmoid hidden layer), then
    classified by the same weighted ELM as the learned pipeline.
    """
    cache: dict[int, np.ndarray] = {}

    def features_of(records: Sequence[TcRecord]) -> np.ndarray:
        missing = [r for r in records if id(r) not in cache]
        if missing:
            rows = hand_feature_matrix(missing)
            for rec, row in zip(missing, rows):
                cache[id(rec)] = row
        return np.stack([cache[id(r)] for r in records])

    def run(
        train_records: Sequence[TcRecord],
        test_records: Sequence[TcRecord],
        seed: int,
    ) -> np.ndarray:
        rng = make_rng(derive_seed(seed, _STREAM_ELM))
        return _minmax_scores(
            features_of(train_records),
            features_of(test_records),
            record_targets(train_records),
            config,
            rng,
        )

    return run


def make_learned_pipeline(
    config: PipelineConfig,
    unsupervised: tuple[RescaleStats, SdaeModel] | None = None,
):
    """Train-and-score procedure over SDAE features.

    With ``unsupervised`` given (global scope), the rescale stats and SDAE
    are taken as a fixed, pre-fitted representation and only the ELM is
    fitted per fold.  Without it (per-fold scope), stats and SDAE are
    refitted from scratch on each training fold.
    """

    def run(
        train_records: Sequence[TcRecord],
        test_records: Sequence[TcRecord],
        seed: int,
    ) -> np.ndarray:
        if unsupervised is None:
            stats, sdae_model = fit_unsupervised(train_records, config, seed)
        else:
            stats, sdae_model = unsupervised
        train_x = extract(stats.transform(profile_rows(train_records)), sdae_model)
        test_x = extract(stats.transform(profile_rows(test_records)), sdae_model)
        model = _fit_elm_on_features(
            train_x,
            record_targets(train_records),
            config,
            make_rng(derive_seed(seed, _STREAM_ELM)),
        )
        return np.asarray(score(test_x, model))

    return run
