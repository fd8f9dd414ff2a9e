"""Command-line entry point: vggm-extract extract --arch vgg-m --image ..."""

from __future__ import annotations

import argparse
import sys

from .backbone import architecture_names
from .errors import DecodeError, InvalidArgument, WeightsError
from .extract import ExtractionJob, extract

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


def cmd_extract(args) -> int:
    job = ExtractionJob(image_path=args.image, architecture=args.arch,
                        output_fc1_path=args.out_fc1,
                        output_logits_path=args.out_logits)
    fc1_path, logits_path = extract(job)
    print(f"wrote {fc1_path} and {logits_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vggm-extract",
                                description="CNN feature extraction to feature files")
    sub = p.add_subparsers(dest="command", required=True)
    ex = sub.add_parser("extract", help="extract FC1 features and logits")
    ex.add_argument("--arch", required=True,
                    help=f"architecture: one of {', '.join(architecture_names())}")
    ex.add_argument("--image", required=True)
    ex.add_argument("--out-fc1", required=True)
    ex.add_argument("--out-logits", required=True)
    ex.set_defaults(func=cmd_extract)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except InvalidArgument as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(f"error: missing file: {e.filename}", file=sys.stderr)
        return EXIT_DATA
    except (DecodeError, WeightsError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
