"""Identifiers, file formats and interaction splits.

File formats (UTF-8, ``#`` starts a comment line):

* triples:       ``head<TAB>relation<TAB>tail``
* interactions:  ``region<TAB>pattern``
* features:      first line ``#modality=<name> dim=<D>``, then
                 ``pattern<TAB>v1,v2,...,vD``
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CompletenessError, DimensionError, ParseError, SchemaError


class Kind(Enum):
    REGION = "region"
    PATTERN = "pattern"
    FEATURE = "feature"


@dataclass(frozen=True)
class EntityId:
    kind: Kind
    index: int


class Vocab:
    """Dense per-kind ids with a single global name namespace.

    A name maps to exactly one (kind, index); re-interning under a different
    kind raises SchemaError.
    """

    def __init__(self):
        self._kind_of = {}
        self._index_of = {}
        self._names = {k: [] for k in Kind}

    def intern(self, kind, name):
        seen = self._kind_of.get(name)
        if seen is None:
            idx = len(self._names[kind])
            self._kind_of[name] = kind
            self._index_of[name] = idx
            self._names[kind].append(name)
            return idx
        if seen is not kind:
            raise SchemaError(
                f"name {name!r} already used as {seen.value}, cannot also be {kind.value}"
            )
        return self._index_of[name]

    def lookup(self, kind, name):
        seen = self._kind_of.get(name)
        if seen is not kind:
            raise KeyError(f"unknown {kind.value} name {name!r}")
        return self._index_of[name]

    def entity(self, kind, name):
        return EntityId(kind, self.lookup(kind, name))

    def name(self, kind, index):
        return self._names[kind][index]

    def names(self, kind):
        return list(self._names[kind])

    def count(self, kind):
        return len(self._names[kind])

    @property
    def n_regions(self):
        return self.count(Kind.REGION)

    @property
    def n_patterns(self):
        return self.count(Kind.PATTERN)

    @property
    def n_features(self):
        return self.count(Kind.FEATURE)


@dataclass(frozen=True)
class Triple:
    head: int  # region index
    relation: int
    tail: int  # feature index


@dataclass
class FeatureMatrix:
    modality: str
    matrix: np.ndarray  # |P| x D, row p aligned with pattern index p

    @property
    def dim(self):
        return self.matrix.shape[1]


@dataclass
class InteractionSplit:
    train: dict
    validation: dict
    test: dict

    def regions(self):
        keys = set(self.train) | set(self.validation) | set(self.test)
        return sorted(keys)


@dataclass
class GenConfig:
    n_regions: int
    n_patterns: int
    n_features: int
    n_clusters: int
    p_in: float
    p_out: float
    feature_noise: float
    text_dim: int
    image_dim: int
    seed: int

    def validate(self):
        if not (0.0 <= self.p_out < self.p_in <= 1.0):
            raise ValueError(f"need 0 <= p_out < p_in <= 1, got {self.p_in}, {self.p_out}")
        if self.n_clusters > min(self.n_regions, self.n_patterns):
            raise ValueError("n_clusters must be <= min(n_regions, n_patterns)")
        if self.feature_noise < 0:
            raise ValueError("feature_noise must be >= 0")
        for name in ("n_regions", "n_patterns", "n_features", "n_clusters",
                     "text_dim", "image_dim"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def _data_lines(path):
    """Yield (line_number, stripped_line) for non-comment, non-blank lines."""
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def load_triples(path, vocab=None):
    """Load a triples file; returns (triples, vocab, relation name list)."""
    vocab = vocab if vocab is not None else Vocab()
    relations = []
    rel_of = {}
    seen = set()
    triples = []
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(parts)}")
        head, rel, tail = parts
        r = vocab.intern(Kind.REGION, head)
        f = vocab.intern(Kind.FEATURE, tail)
        t = rel_of.get(rel)
        if t is None:
            t = len(relations)
            rel_of[rel] = t
            relations.append(rel)
        key = (r, t, f)
        if key in seen:
            continue
        seen.add(key)
        triples.append(Triple(r, t, f))
    return triples, vocab, relations


def save_triples(path, triples, vocab, relations):
    with open(path, "w", encoding="utf-8") as fh:
        for t in triples:
            head = vocab.name(Kind.REGION, t.head)
            tail = vocab.name(Kind.FEATURE, t.tail)
            fh.write(f"{head}\t{relations[t.relation]}\t{tail}\n")


def load_interactions(path, vocab=None):
    """Load region->pattern positives; returns (positives, vocab)."""
    vocab = vocab if vocab is not None else Vocab()
    positives = {}
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected 2 tab-separated fields, got {len(parts)}")
        region, pattern = parts
        r = vocab.intern(Kind.REGION, region)
        p = vocab.intern(Kind.PATTERN, pattern)
        positives.setdefault(r, set()).add(p)
    return positives, vocab


def save_interactions(path, positives, vocab):
    with open(path, "w", encoding="utf-8") as fh:
        for r in sorted(positives):
            rname = vocab.name(Kind.REGION, r)
            for p in sorted(positives[r]):
                fh.write(f"{rname}\t{vocab.name(Kind.PATTERN, p)}\n")


def load_feature_matrix(path, expected_dim=None, vocab=None):
    """Load a per-pattern feature file into a dense |P| x D matrix.

    With a vocab the file must cover exactly the known pattern set; standalone
    the file itself defines the pattern ids (also recorded in the vocab it
    creates).
    """
    strict = vocab is not None
    vocab = vocab if vocab is not None else Vocab()
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
    fields = header.lstrip("#").split()
    meta = dict(f.split("=", 1) for f in fields if "=" in f)
    if not header.startswith("#") or "modality" not in meta or "dim" not in meta:
        raise ParseError(f"{path}:1: expected header '#modality=<name> dim=<D>'")
    modality = meta["modality"]
    dim = int(meta["dim"])
    if expected_dim is not None and dim != expected_dim:
        raise DimensionError(f"{path}: header dim={dim}, expected {expected_dim}")

    rows = {}
    known = set(vocab.names(Kind.PATTERN)) if strict else None
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected 2 tab-separated fields, got {len(parts)}")
        name, values = parts
        if strict and name not in known:
            raise CompletenessError(f"{path}:{lineno}: pattern {name!r} not in the interaction vocabulary")
        p = vocab.intern(Kind.PATTERN, name)
        if p in rows:
            raise ParseError(f"{path}:{lineno}: pattern {name!r} listed twice")
        vec = np.array([float(v) for v in values.split(",")], dtype=np.float64)
        if vec.shape[0] != dim:
            raise DimensionError(
                f"{path}:{lineno}: row {name!r} has {vec.shape[0]} values, header says {dim}"
            )
        rows[p] = vec

    n = vocab.n_patterns
    missing = [vocab.name(Kind.PATTERN, p) for p in range(n) if p not in rows]
    if missing:
        raise CompletenessError(f"{path}: missing rows for patterns: {', '.join(missing)}")
    matrix = np.zeros((n, dim), dtype=np.float64)
    for p, vec in rows.items():
        matrix[p] = vec
    matrix.flags.writeable = False
    return FeatureMatrix(modality, matrix)


def save_feature_matrix(path, fm, vocab):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#modality={fm.modality} dim={fm.dim}\n")
        for p in range(fm.matrix.shape[0]):
            values = ",".join(repr(float(v)) for v in fm.matrix[p])
            fh.write(f"{vocab.name(Kind.PATTERN, p)}\t{values}\n")


def split_interactions(positives, seed):
    """80/20 train/test per region, then 20% of the train pool as validation.

    Regions with a single positive contribute it to train. For n >= 2 the test
    size is max(1, round(0.2*n)); selection is uniform under the seed.
    """
    if not positives:
        raise ValueError("positives must be non-empty")
    rng = np.random.default_rng(seed)
    train, validation, test = {}, {}, {}
    for r in sorted(positives):
        pats = sorted(positives[r])
        n = len(pats)
        if n == 1:
            train[r] = set(pats)
            continue
        order = rng.permutation(n)
        n_test = max(1, round(0.2 * n))
        pool = n - n_test
        n_val = round(0.2 * pool)
        shuffled = [pats[i] for i in order]
        test[r] = set(shuffled[:n_test])
        validation[r] = set(shuffled[n_test:n_test + n_val])
        train[r] = set(shuffled[n_test + n_val:])
        if not validation[r]:
            del validation[r]
    return InteractionSplit(train=train, validation=validation, test=test)


@dataclass
class Dataset:
    """Loaded corpus: vocabulary, triples, positives and optional modalities."""

    vocab: Vocab
    triples: list
    relations: list
    positives: dict
    text: FeatureMatrix | None = None
    image: FeatureMatrix | None = None

    @property
    def n_relations(self):
        return len(self.relations)


def load_dataset(triples_path, interactions_path, text_path=None, image_path=None):
    triples, vocab, relations = load_triples(triples_path)
    positives, vocab = load_interactions(interactions_path, vocab)
    text = load_feature_matrix(text_path, vocab=vocab) if text_path else None
    image = load_feature_matrix(image_path, vocab=vocab) if image_path else None
    return Dataset(vocab=vocab, triples=triples, relations=relations,
                   positives=positives, text=text, image=image)
