"""CLI entry points: extract-text and extract-images."""

import argparse
import sys

from .encoders import make_image_encoder, make_text_encoder
from .errors import EncoderError, ExtractError
from .extract import (extract_image_features, extract_text_features,
                      load_definitions, read_pattern_list, scan_image_dir,
                      write_feature_file)


def run_text(argv):
    parser = argparse.ArgumentParser(
        prog="extract-text",
        description="Encode pattern definition texts into a 768-d feature file.")
    parser.add_argument("--definitions", required=True,
                        help="pattern<TAB>definition file")
    parser.add_argument("--out", required=True, help="output feature file")
    parser.add_argument("--encoder", default="bert",
                        help="'bert[:model]' (pretrained) or 'seeded' (offline)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        encoder = make_text_encoder(args.encoder)
        assets = load_definitions(args.definitions)
        names, matrix = extract_text_features(assets, encoder)
        write_feature_file(args.out, "text", names, matrix)
    except EncoderError as exc:
        print(f"extract-text: {exc}", file=sys.stderr)
        return 2
    except (ExtractError, OSError) as exc:
        print(f"extract-text: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(names)} x {matrix.shape[1]} text features to {args.out}")
    return 0


def run_images(argv):
    parser = argparse.ArgumentParser(
        prog="extract-images",
        description="Encode pattern images into a 2048-d feature file.")
    parser.add_argument("--dir", required=True, help="directory of <pattern>.<ext> images")
    parser.add_argument("--out", required=True, help="output feature file")
    parser.add_argument("--encoder", default="resnet50",
                        help="'resnet50' (pretrained) or 'seeded' (offline)")
    parser.add_argument("--patterns",
                        help="optional list of expected pattern names (one per line)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        encoder = make_image_encoder(args.encoder)
        assets = scan_image_dir(args.dir)
        expected = read_pattern_list(args.patterns) if args.patterns else None
        names, matrix = extract_image_features(assets, encoder, expected)
        write_feature_file(args.out, "image", names, matrix)
    except EncoderError as exc:
        print(f"extract-images: {exc}", file=sys.stderr)
        return 2
    except (ExtractError, OSError) as exc:
        print(f"extract-images: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(names)} x {matrix.shape[1]} image features to {args.out}")
    return 0


def main_text():
    sys.exit(run_text(sys.argv[1:]))


def main_images():
    sys.exit(run_images(sys.argv[1:]))
