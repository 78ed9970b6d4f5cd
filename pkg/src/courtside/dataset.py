"""Team-season records, CSV ingestion, seeded splits and z-score scaling.

Features are kept in a fixed canonical order: the 13 team statistics in the
column order of the CSV schema, then the same 13 for opponents. Every model
file and importance report indexes features by this order.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np

from courtside.errors import ParseError, SchemaError, ValidationError

logger = logging.getLogger(__name__)

# (csv column, attribute) for the 13 per-game team statistics
_OWN = [
    ("X3P", "threes_made"),
    ("X3PA", "threes_att"),
    ("X2P", "twos_made"),
    ("X2PA", "twos_att"),
    ("FT", "ft_made"),
    ("FTA", "ft_att"),
    ("ORB", "orb"),
    ("DRB", "drb"),
    ("AST", "ast"),
    ("STL", "stl"),
    ("BLK", "blk"),
    ("TOV", "tov"),
    ("PF", "pf"),
]
_COLUMNS = _OWN + [("o" + col, "opp_" + attr) for col, attr in _OWN]

FEATURES: tuple[str, ...] = tuple(col for col, _ in _COLUMNS)
FEATURE_FIELDS: tuple[str, ...] = tuple(attr for _, attr in _COLUMNS)
COLUMN_TO_FIELD = dict(_COLUMNS)
FIELD_TO_COLUMN = {attr: col for col, attr in _COLUMNS}

HEADER: tuple[str, ...] = ("Team", "Season", *FEATURES, "Playoffs", "Champion")
LABELS = ("playoffs", "champion")

_MADE_ATTEMPTED = [
    (p + made, p + att)
    for p in ("", "opp_")
    for made, att in (("threes_made", "threes_att"), ("twos_made", "twos_att"), ("ft_made", "ft_att"))
]


@dataclass(frozen=True)
class TeamSeason:
    team_id: str
    season: str
    threes_made: float
    threes_att: float
    twos_made: float
    twos_att: float
    ft_made: float
    ft_att: float
    orb: float
    drb: float
    ast: float
    stl: float
    blk: float
    tov: float
    pf: float
    opp_threes_made: float
    opp_threes_att: float
    opp_twos_made: float
    opp_twos_att: float
    opp_ft_made: float
    opp_ft_att: float
    opp_orb: float
    opp_drb: float
    opp_ast: float
    opp_stl: float
    opp_blk: float
    opp_tov: float
    opp_pf: float
    playoffs: bool
    champion: bool = False

    @property
    def rates(self) -> tuple[float, ...]:
        return tuple(getattr(self, attr) for attr in FEATURE_FIELDS)

    def label(self, target: str) -> bool:
        if target not in LABELS:
            raise ValueError(f"unknown target {target!r}; expected one of {LABELS}")
        return getattr(self, target)


def validate_row(row: TeamSeason, where: str = "") -> None:
    """Raise ValidationError if a raw (unscaled) record breaks a rate invariant.

    A champion that missed the playoffs only logs a warning.
    """
    prefix = f"{where}: " if where else ""
    for attr in FEATURE_FIELDS:
        value = getattr(row, attr)
        if not math.isfinite(value) or value < 0:
            raise ValidationError(f"{prefix}{FIELD_TO_COLUMN[attr]} must be finite and >= 0, got {value!r}")
    for made, att in _MADE_ATTEMPTED:
        if getattr(row, att) < getattr(row, made):
            raise ValidationError(
                f"{prefix}{FIELD_TO_COLUMN[att]}={getattr(row, att)!r} is below "
                f"{FIELD_TO_COLUMN[made]}={getattr(row, made)!r} (attempts < makes)"
            )
    if row.champion and not row.playoffs:
        logger.warning("%schampion %s %s is labeled as missing the playoffs", prefix, row.team_id, row.season)


@dataclass(frozen=True)
class Dataset:
    rows: tuple[TeamSeason, ...]
    feature_names: tuple[str, ...] = FEATURES
    has_champion: bool = True
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if len(self.feature_names) != 26 or len(set(self.feature_names)) != 26:
            raise SchemaError("feature_names must list 26 distinct predictors")

    def __len__(self) -> int:
        return len(self.rows)

    @cached_property
    def X(self) -> np.ndarray:
        """Feature matrix, shape (n_rows, 26), canonical column order."""
        if not self.rows:
            return np.empty((0, len(FEATURES)))
        return np.array([r.rates for r in self.rows], dtype=float)

    def labels(self, target: str = "playoffs") -> np.ndarray:
        return np.array([r.label(target) for r in self.rows], dtype=bool)

    def subset(self, indices: Iterable[int]) -> "Dataset":
        return replace(self, rows=tuple(self.rows[i] for i in indices))

    def with_features(self, X: np.ndarray) -> "Dataset":
        """Copy of this dataset with the rate columns replaced by ``X``."""
        X = np.asarray(X, dtype=float)
        if X.shape != (len(self.rows), len(FEATURE_FIELDS)):
            raise ValueError(f"expected shape {(len(self.rows), len(FEATURE_FIELDS))}, got {X.shape}")
        rows = tuple(
            replace(r, **{attr: float(v) for attr, v in zip(FEATURE_FIELDS, x)}) for r, x in zip(self.rows, X)
        )
        return replace(self, rows=rows)


def _parse_label(token: str, line: int, column: str) -> bool:
    t = token.strip().upper()
    if t == "TRUE":
        return True
    if t == "FALSE":
        return False
    raise ParseError(f"row {line}, column {column}: expected TRUE or FALSE, got {token!r}")


def _check_header(header: Sequence[str]) -> bool:
    seen = set()
    for name in header:
        if name in seen:
            raise SchemaError(f"duplicated column {name!r}")
        seen.add(name)
    for name in header:
        if name not in HEADER:
            raise SchemaError(f"unexpected column {name!r}")
    for name in HEADER[:-1]:
        if name not in seen:
            raise SchemaError(f"missing column {name!r}")
    with_champion = "Champion" in seen
    expected = list(HEADER if with_champion else HEADER[:-1])
    if list(header) != expected:
        raise SchemaError(f"columns out of order; expected {','.join(expected)}")
    return with_champion


def parse_csv(source: IO[bytes] | IO[str] | bytes | str) -> Dataset:
    """Parse the canonical team-season CSV.

    ``source`` may be a binary or text stream, or the raw content. Rows are
    validated as they are read; the first bad cell raises.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise SchemaError("empty input: no header row") from None
    with_champion = _check_header(header)

    rows = []
    for line, cells in enumerate(reader, start=2):
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) != len(header):
            raise ParseError(f"row {line}: expected {len(header)} cells, got {len(cells)}")
        values: dict[str, object] = {"team_id": cells[0].strip(), "season": cells[1].strip()}
        for col, cell in zip(header[2:28], cells[2:28]):
            try:
                values[COLUMN_TO_FIELD[col]] = float(cell)
            except ValueError:
                raise ParseError(f"row {line}, column {col}: not a number: {cell!r}") from None
        values["playoffs"] = _parse_label(cells[28], line, "Playoffs")
        values["champion"] = _parse_label(cells[29], line, "Champion") if with_champion else False
        row = TeamSeason(**values)
        validate_row(row, where=f"row {line}")
        rows.append(row)

    notes = () if with_champion else ("no Champion column; all champion labels set to FALSE",)
    return Dataset(rows=tuple(rows), has_champion=with_champion, notes=notes)


def read_csv(path) -> Dataset:
    with open(path, "rb") as fh:
        return parse_csv(fh)


def to_csv(data: Dataset) -> str:
    """Serialize to the canonical schema. ``repr`` keeps floats bit-exact."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = HEADER if data.has_champion else HEADER[:-1]
    writer.writerow(header)
    for r in data.rows:
        cells = [r.team_id, r.season, *(repr(v) for v in r.rates), "TRUE" if r.playoffs else "FALSE"]
        if data.has_champion:
            cells.append("TRUE" if r.champion else "FALSE")
        writer.writerow(cells)
    return out.getvalue()


@dataclass(frozen=True)
class SplitPair:
    train: Dataset
    test: Dataset
    seed: int
    train_fraction: float
    train_indices: tuple[int, ...] = ()
    test_indices: tuple[int, ...] = ()


def split(
    data: Dataset,
    train_fraction: float = 0.6,
    seed: int = 0,
    stratify: str | None = None,
) -> SplitPair:
    """Seeded shuffle split; the first round(train_fraction * N) shuffled rows train.

    With ``stratify`` set to a label name, each class is shuffled and cut
    separately so both partitions keep the class balance (sizes then follow
    per-class rounding).
    """
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(data)
    n_train = math.floor(train_fraction * n + 0.5)
    if n < 2 or n_train < 1 or n_train > n - 1:
        raise ValueError(f"{n} rows cannot give non-empty train and test partitions at fraction {train_fraction}")
    rng = np.random.default_rng(seed)
    if stratify is None:
        perm = rng.permutation(n)
        train_idx, test_idx = perm[:n_train], perm[n_train:]
    else:
        y = data.labels(stratify)
        train_parts, test_parts = [], []
        for cls in (False, True):
            idx = np.flatnonzero(y == cls)
            idx = idx[rng.permutation(len(idx))]
            k = math.floor(train_fraction * len(idx) + 0.5)
            train_parts.append(idx[:k])
            test_parts.append(idx[k:])
        train_idx = np.concatenate(train_parts)
        test_idx = np.concatenate(test_parts)
    return SplitPair(
        train=data.subset(train_idx),
        test=data.subset(test_idx),
        seed=seed,
        train_fraction=train_fraction,
        train_indices=tuple(int(i) for i in train_idx),
        test_indices=tuple(int(i) for i in test_idx),
    )


@dataclass(frozen=True)
class ScalingParams:
    mean: np.ndarray
    sd: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.sd

    def inverse(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.sd + self.mean


def fit_scaling(train: Dataset | np.ndarray) -> ScalingParams:
    """Column means and sample (N-1) standard deviations; zero sd becomes 1."""
    X = train.X if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    if X.shape[0] == 0:
        raise ValueError("cannot fit scaling on an empty training set")
    mean = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1) if X.shape[0] > 1 else np.zeros(X.shape[1])
    sd = np.where(sd > 0, sd, 1.0)
    return ScalingParams(mean=mean, sd=sd)


def apply_scaling(params: ScalingParams, data: Dataset) -> Dataset:
    return data.with_features(params.transform(data.X))


def invert_scaling(params: ScalingParams, data: Dataset) -> Dataset:
    return data.with_features(params.inverse(data.X))


def scaling_to_csv(params: ScalingParams, names: Sequence[str] = FEATURES) -> str:
    lines = ["feature,mean,sd"]
    lines += [f"{n},{m!r},{s!r}" for n, m, s in zip(names, params.mean.tolist(), params.sd.tolist())]
    return "\n".join(lines) + "\n"


def scaling_from_csv(text: str) -> ScalingParams:
    rows = list(csv.reader(io.StringIO(text)))[1:]
    return ScalingParams(
        mean=np.array([float(r[1]) for r in rows if r]), sd=np.array([float(r[2]) for r in rows if r])
    )
