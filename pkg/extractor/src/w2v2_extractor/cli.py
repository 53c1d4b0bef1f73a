"""Command line for the extractor.

Exit codes: 0 success (possibly with skipped files), 1 usage error,
2 data/model error.
"""

from __future__ import annotations

import argparse
import sys

from .extract import ExtractorConfig, ExtractorError, extract

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def main(argv=None) -> int:
    parser = _Parser(prog="w2v2-extract", description=__doc__)
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--model", default="facebook/wav2vec2-base")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--batch-size", type=int, default=1)
    parser.add_argument("--random-init", action="store_true",
                        help="seeded untrained weights instead of downloading")
    parser.add_argument("--seed", type=int, default=0)
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    cfg = ExtractorConfig(
        manifest=args.manifest,
        out_dir=args.out,
        model_id=args.model,
        device=args.device,
        batch_size=args.batch_size,
        random_init=args.random_init,
        seed=args.seed,
    )
    try:
        n, errors = extract(cfg)
    except (ExtractorError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA
    print(f"wrote {n} bundles to {cfg.out_dir} ({len(errors)} skipped)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
