"""Certified majority voting over random knowledge-graph subgraphs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core import SimReport, check_probability, check_seed, parallel_map, trial_blocks, trial_rng

DIRECT_WEIGHT = 1.0
PATH_WEIGHT = 0.5
MAX_ENUMERATION = 16
# Relation label used for adversarial hop insertions; path scores ignore relations.
ADV_RELATION = "__adv__"


class NoCandidate(ValueError):
    pass


@dataclass(frozen=True)
class ToyKG:
    entities: tuple
    triples: tuple

    def __post_init__(self) -> None:
        ents = tuple(sorted(set(self.entities)))
        object.__setattr__(self, "entities", ents)
        trips = tuple(tuple(t) for t in self.triples)
        if len(set(trips)) != len(trips):
            raise ValueError("duplicate triples")
        known = set(ents)
        for h, _, t in trips:
            if h not in known or t not in known:
                raise ValueError(f"triple ({h}, {t}) references an undeclared entity")
        object.__setattr__(self, "triples", trips)

    @classmethod
    def from_triples(cls, triples, entities=None) -> "ToyKG":
        triples = [tuple(t) for t in triples]
        ents = set(entities or ())
        for h, _, t in triples:
            ents.update((h, t))
        return cls(tuple(ents), tuple(triples))

    @classmethod
    def load(cls, path) -> "ToyKG":
        """Read ``head<TAB>relation<TAB>tail`` lines; blank and # lines are skipped."""
        triples = []
        for i, line in enumerate(Path(path).read_text().splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"line {i}: expected 3 tab-separated fields")
            triples.append(tuple(p.strip() for p in parts))
        return cls.from_triples(triples)

    def with_edits(self, removed=(), added=()) -> "ToyKG":
        removed = set(removed)
        kept = [t for t in self.triples if t not in removed]
        return ToyKG(self.entities, tuple(kept) + tuple(added))


@dataclass(frozen=True)
class _Scoring:
    """Score structure of one query as index arrays over triples."""

    candidates: tuple
    direct: np.ndarray  # (n_triples, n_candidates) 0/1
    paths: list  # (triple_i, triple_j, candidate_index)
    n: int


def _scoring(kg: ToyKG, query, check_relation: bool = True) -> _Scoring:
    head, rel = query
    if head not in kg.entities:
        raise NoCandidate(f"head {head!r} is not in the graph")
    if check_relation and not any(r == rel for _, r, _ in kg.triples):
        raise NoCandidate(f"relation {rel!r} is not in the graph")
    cands = tuple(e for e in kg.entities if e != head)
    if not cands:
        raise NoCandidate("no candidate tails")
    cidx = {e: i for i, e in enumerate(cands)}
    n = len(kg.triples)
    direct = np.zeros((n, len(cands)))
    for i, (h, r, t) in enumerate(kg.triples):
        if h == head and r == rel and t in cidx:
            direct[i, cidx[t]] = 1.0
    paths = []
    for i, (h1, _, x) in enumerate(kg.triples):
        if h1 != head or x == head:
            continue
        for j, (h2, _, e) in enumerate(kg.triples):
            if h2 == x and e in cidx and j != i:
                paths.append((i, j, cidx[e]))
    return _Scoring(cands, direct, paths, n)


def _scores(sc: _Scoring, masks: np.ndarray) -> np.ndarray:
    s = DIRECT_WEIGHT * (masks.astype(float) @ sc.direct)
    for i, j, c in sc.paths:
        s[:, c] += PATH_WEIGHT * (masks[:, i] & masks[:, j])
    return s


def _votes(scores: np.ndarray, rank_cutoff: int) -> np.ndarray:
    """0/1 vote matrix: each subgraph backs its top candidates with positive score.

    Candidates are pre-sorted by label, so a stable sort on -score breaks
    ties lexicographically. All-zero subgraphs abstain.
    """
    order = np.argsort(-scores, axis=1, kind="stable")[:, :rank_cutoff]
    votes = np.zeros_like(scores)
    rows = np.arange(scores.shape[0])[:, None]
    votes[rows, order] = 1.0
    votes *= scores > 0
    return votes


def _winner(vote_share: np.ndarray) -> int:
    # argmax returns the first maximum, i.e. the lexicographically smallest label.
    return int(np.argmax(vote_share))


@dataclass(frozen=True)
class VoteResult:
    prediction: str
    p_A: float
    report: SimReport
    shares: dict


def kg_vote(kg: ToyKG, query, L: int, p: float, seed: int, rank_cutoff: int = 1,
            workers: int = 1) -> VoteResult:
    """Majority vote over L subgraphs that keep each triple with probability p."""
    p = check_probability(p, "p")
    if L < 1 or rank_cutoff < 1:
        raise ValueError("L and rank_cutoff must be positive")
    seed = check_seed(seed)
    sc = _scoring(kg, query)

    def run(block):
        idx, size = block
        masks = trial_rng(seed, idx).random((size, sc.n)) < p
        return _votes(_scores(sc, masks), rank_cutoff).sum(axis=0)

    counts = np.sum(parallel_map(run, trial_blocks(L), workers), axis=0)
    w = _winner(counts)
    k = int(counts[w])
    return VoteResult(sc.candidates[w], k / L, SimReport.from_counts(k, L, seed),
                      {c: counts[i] / L for i, c in enumerate(sc.candidates)})


def exact_vote_shares(kg: ToyKG, query, p: float, rank_cutoff: int = 1) -> dict:
    """Exact vote probability per candidate by enumerating all 2^n subgraphs."""
    p = check_probability(p, "p")
    sc = _scoring(kg, query)
    if sc.n > MAX_ENUMERATION:
        raise ValueError(f"exact enumeration supports at most {MAX_ENUMERATION} triples")
    shares = _exact_shares(sc, p, rank_cutoff)
    return {c: float(shares[i]) for i, c in enumerate(sc.candidates)}


def _exact_shares(sc: _Scoring, p: float, rank_cutoff: int) -> np.ndarray:
    n = sc.n
    codes = np.arange(2**n, dtype=np.int64)
    masks = ((codes[:, None] >> np.arange(n)) & 1).astype(bool)
    k = masks.sum(axis=1)
    weights = p**k * (1 - p) ** (n - k)
    return weights @ _votes(_scores(sc, masks), rank_cutoff)


def certified_radius(p_A: float, p: float) -> int:
    """Certified number of triple edits floor(ln(p_A/(1-p_A)) / (2 |ln(1-p)|)); 0 when p_A <= 1/2."""
    p_A = check_probability(p_A, "p_A")
    p = check_probability(p, "p")
    if not 0 < p < 1:
        raise ValueError("retention p must lie in (0, 1)")
    if p_A <= 0.5:
        return 0
    if p_A == 1.0:
        raise ValueError("p_A = 1 gives an unbounded radius; use a confidence bound")
    return math.floor(math.log(p_A / (1 - p_A)) / (2 * abs(math.log(1 - p))))


def certify(vote: VoteResult, p: float, use_point_estimate: bool = False) -> int:
    """Radius from a vote, using the lower Wilson endpoint unless told otherwise."""
    pa = vote.p_A if use_point_estimate else vote.report.ci_low
    return certified_radius(min(pa, 1 - 1e-12), p)


def _edit_pool(kg: ToyKG, query) -> tuple[list, list]:
    """Removals and additions that can change any candidate's score."""
    head, rel = query
    existing = set(kg.triples)
    sc = _scoring(kg, query)
    relevant = set(np.nonzero(sc.direct.any(axis=1))[0].tolist())
    for i, j, _ in sc.paths:
        relevant.update((i, j))
    removals = [kg.triples[i] for i in sorted(relevant)]
    others = [e for e in kg.entities if e != head]
    additions = []
    for e in others:
        additions.append((head, rel, e))
        if rel != ADV_RELATION:
            additions.append((head, ADV_RELATION, e))
    for x in others:
        for e in others:
            if x != e:
                additions.append((x, ADV_RELATION, e))
    additions = [a for a in additions if a not in existing]
    return removals, additions


def _hop_useful(edit, head, graph_triples) -> bool:
    """A second-hop insertion matters only if its source is a neighbour of head."""
    h, _, _ = edit
    if h == head:
        return True
    return any(t[0] == head and t[2] == h for t in graph_triples)


@dataclass(frozen=True)
class OracleResult:
    robust: bool
    flip_edits: tuple | None
    checked: int


def radius_oracle(kg: ToyKG, query, p: float, delta_test: int, rank_cutoff: int = 1,
                  workers: int = 1) -> OracleResult:
    """Exhaustive adversary: does any set of at most ``delta_test`` edits flip the winner?

    Every perturbed graph is scored exactly by enumerating all retained
    subgraphs. Additions use a canonical relation label since path scores
    ignore relations; insertions that cannot touch any score are pruned.
    """
    p = check_probability(p, "p")
    if delta_test < 0:
        raise ValueError("delta_test must be non-negative")
    if len(kg.triples) + delta_test > MAX_ENUMERATION:
        raise ValueError(f"triples + delta_test must be <= {MAX_ENUMERATION}")
    head = query[0]
    base = _scoring(kg, query)
    base_winner = base.candidates[_winner(_exact_shares(base, p, rank_cutoff))]
    if delta_test == 0:
        return OracleResult(True, None, 0)
    removals, additions = _edit_pool(kg, query)
    pool = [("-", t) for t in removals] + [("+", t) for t in additions]

    combos = []
    for size in range(1, delta_test + 1):
        for combo in itertools.combinations(pool, size):
            rem = [t for s, t in combo if s == "-"]
            add = [t for s, t in combo if s == "+"]
            kept = [t for t in kg.triples if t not in set(rem)] + add
            if all(_hop_useful(a, head, kept) for a in add):
                combos.append((tuple(rem), tuple(add)))

    def flips(edit):
        rem, add = edit
        sc = _scoring(kg.with_edits(rem, add), query, check_relation=False)
        shares = _exact_shares(sc, p, rank_cutoff)
        if shares.max() == 0:
            return True
        return sc.candidates[_winner(shares)] != base_winner

    chunk = 64
    for start in range(0, len(combos), chunk):
        batch = combos[start:start + chunk]
        for edit, flipped in zip(batch, parallel_map(flips, batch, workers)):
            if flipped:
                return OracleResult(False, edit, start + batch.index(edit) + 1)
    return OracleResult(True, None, len(combos))
