import argparse
import sys
from typing import Optional, Sequence

from .config import ServiceConfig
from .service import create_app


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morphcheck-sidecar")
    parser.add_argument("--checkpoint", help="transformer checkpoint name or path")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--echo", action="store_true", help="serve the echo conformance backend")
    parser.add_argument(
        "--layer-policy",
        default="all",
        help="'all' or 'last:N' to limit which hidden layers requests may use",
    )
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-batch", type=int, default=64)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ServiceConfig(
            checkpoint=args.checkpoint,
            device=args.device,
            max_batch=args.max_batch,
            layer_policy=args.layer_policy,
            echo_mode=args.echo,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    import uvicorn

    uvicorn.run(create_app(config), host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
