"""Deterministic synthetic team-season data in the canonical schema.

Rates are drawn as attempts times a make percentage, so attempts never fall
below makes. The playoff label is a Bernoulli draw from a logistic score
dominated by opponent assists, opponent two-point makes and steals; each
season's champion is the playoff team with the best noisy score built from
two-point makes, defensive rebounds and (negatively) opponent three-point
makes. The ground truth is chosen so that the downstream models have
something definite to recover; it is not evidence about real teams.
"""

from __future__ import annotations

import numpy as np

from courtside.dataset import FEATURE_FIELDS, Dataset, TeamSeason, validate_row

FIRST_SEASON = 1999
N_TEAMS_EARLY = 29  # before the 2004-05 expansion
N_TEAMS = 30

# attempts: (mean, sd, per-season drift); make percentage: (mean, sd)
_SHOTS = {
    "threes": ((14.0, 2.5, 0.45), (0.355, 0.02)),
    "twos": ((67.0, 3.5, -0.35), (0.485, 0.02)),
    "ft": ((24.5, 2.3, -0.1), (0.755, 0.03)),
}
_COUNTING = {
    "orb": (11.8, 1.3),
    "drb": (30.6, 1.4),
    "ast": (21.6, 1.7),
    "stl": (7.6, 0.8),
    "blk": (4.9, 0.7),
    "tov": (14.3, 1.1),
    "pf": (21.4, 1.5),
}

PLAYOFF_WEIGHTS = {
    "opp_ast": -2.2,
    "opp_twos_made": -1.6,
    "stl": 1.3,
    "drb": 0.6,
    "ast": 0.5,
    "opp_tov": 0.4,
}
CHAMPION_WEIGHTS = {"twos_made": 1.4, "drb": 1.1, "opp_threes_made": -1.4}


def season_label(start_year: int) -> str:
    return f"{start_year}-{(start_year + 1) % 100:02d}"


def _season_sizes(n_rows: int) -> list[int]:
    sizes = []
    k = 0
    while sum(sizes) < n_rows:
        teams = N_TEAMS_EARLY if k < 5 else N_TEAMS
        sizes.append(min(teams, n_rows - sum(sizes)))
        k += 1
    return sizes


def _side(rng: np.random.Generator, n: int, season_index: np.ndarray) -> dict[str, np.ndarray]:
    cols = {}
    for kind, ((att_mu, att_sd, drift), (pct_mu, pct_sd)) in _SHOTS.items():
        att = np.clip(rng.normal(att_mu + drift * season_index, att_sd), 1.0, None)
        pct = np.clip(rng.normal(pct_mu, pct_sd, n), 0.05, 0.95)
        att = np.round(att, 9)
        cols[f"{kind}_att"] = att
        cols[f"{kind}_made"] = np.minimum(np.round(att * pct, 9), att)
    for name, (mu, sd) in _COUNTING.items():
        cols[name] = np.round(np.clip(rng.normal(mu, sd, n), 0.1, None), 9)
    return cols


def _zscore(v: np.ndarray) -> np.ndarray:
    return (v - v.mean()) / v.std()


def generate(seed: int = 42, n_rows: int = 505) -> Dataset:
    rng = np.random.default_rng(seed)
    sizes = _season_sizes(n_rows)
    season_index = np.repeat(np.arange(len(sizes)), sizes).astype(float)
    own = _side(rng, n_rows, season_index)
    opp = _side(rng, n_rows, season_index)
    cols = {**own, **{"opp_" + k: v for k, v in opp.items()}}

    score = sum(w * _zscore(cols[f]) for f, w in PLAYOFF_WEIGHTS.items())
    playoffs = rng.random(n_rows) < 1.0 / (1.0 + np.exp(-score))

    champ_score = sum(w * _zscore(cols[f]) for f, w in CHAMPION_WEIGHTS.items())
    champ_score = champ_score + 0.5 * rng.gumbel(size=n_rows)
    champion = np.zeros(n_rows, dtype=bool)
    start = 0
    for size in sizes:
        block = np.arange(start, start + size)
        pool = block[playoffs[block]]
        if pool.size == 0:
            pool = block
            playoffs[block[np.argmax(score[block])]] = True
        champion[pool[np.argmax(champ_score[pool])]] = True
        start += size

    rows = []
    start = 0
    for k, size in enumerate(sizes):
        season = season_label(FIRST_SEASON + k)
        for t in range(size):
            i = start + t
            team = f"T{t + 1:02d}"
            rates = {f: float(cols[f][i]) for f in FEATURE_FIELDS}
            row = TeamSeason(team_id=team, season=season, playoffs=bool(playoffs[i]), champion=bool(champion[i]), **rates)
            validate_row(row)
            rows.append(row)
        start += size
    return Dataset(rows=tuple(rows))
