"""Batch extraction of pattern assets into the engine's feature-file format.

Feature file format (identical to the engine's loader contract):
first line ``#modality=<name> dim=<D>``, then one
``pattern<TAB>v1,v2,...,vD`` row per pattern, in input order.
"""

import os
from dataclasses import dataclass

from .errors import AssetError, CompletenessError
from .preprocess import preprocess_image

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp")


@dataclass
class PatternAsset:
    name: str
    definition: str | None = None
    image_path: str | None = None


def load_definitions(path):
    """Parse ``pattern<TAB>definition`` lines; '#' starts a comment."""
    assets = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "\t" not in line:
                raise AssetError(f"{path}:{lineno}: expected 'pattern<TAB>definition'")
            name, definition = line.split("\t", 1)
            if name in seen:
                raise AssetError(f"{path}:{lineno}: pattern {name!r} listed twice")
            seen.add(name)
            assets.append(PatternAsset(name=name, definition=definition))
    return assets


def scan_image_dir(directory):
    """One asset per image file, pattern name taken from the file stem."""
    assets = {}
    for entry in sorted(os.listdir(directory)):
        stem, ext = os.path.splitext(entry)
        if ext.lower() not in IMAGE_EXTENSIONS:
            continue
        if stem in assets:
            raise AssetError(f"{directory}: multiple images for pattern {stem!r}")
        assets[stem] = PatternAsset(name=stem, image_path=os.path.join(directory, entry))
    return [assets[name] for name in sorted(assets)]


def extract_text_features(assets, encoder):
    """Encode definitions; returns (names, |P| x 768 matrix)."""
    empty = [a.name for a in assets if not (a.definition or "").strip()]
    if empty:
        raise CompletenessError(f"empty definition for patterns: {', '.join(empty)}")
    names = [a.name for a in assets]
    return names, encoder.encode([a.definition for a in assets])


def extract_image_features(assets, encoder, expected_names=None):
    """Preprocess and encode images; returns (names, |P| x 2048 matrix)."""
    if expected_names is not None:
        have = {a.name for a in assets}
        missing = sorted(set(expected_names) - have)
        if missing:
            raise CompletenessError(f"missing images for patterns: {', '.join(missing)}")
    names = [a.name for a in assets]
    blocks = [preprocess_image(a.image_path) for a in assets]
    return names, encoder.encode(blocks)


def write_feature_file(path, modality, names, matrix):
    """Write the engine feature-file format, rows ordered by input order."""
    if matrix.shape[0] != len(names):
        raise AssetError("row count does not match pattern names")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#modality={modality} dim={matrix.shape[1]}\n")
        for name, row in zip(names, matrix):
            values = ",".join(repr(float(v)) for v in row)
            fh.write(f"{name}\t{values}\n")


def read_pattern_list(path):
    """Plain list of expected pattern names, one per line."""
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh
                if line.strip() and not line.lstrip().startswith("#")]
