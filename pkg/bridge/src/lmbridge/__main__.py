"""CLI: load the slot config and serve over HTTP."""

import argparse
import logging


def main() -> None:
    parser = argparse.ArgumentParser(prog="lmbridge", description=__doc__)
    parser.add_argument("--config", required=True, help="JSON file listing model slots")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8900)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    import uvicorn

    from .config import load_config
    from .models import load_slots
    from .server import create_app

    app = create_app(load_slots(load_config(args.config)))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info" if args.verbose else "warning")


if __name__ == "__main__":
    main()
