#!/usr/bin/env python3
"""Run the grading service.

    python scripts/serve.py [--config config.json]

Environment variables GRADEBOX_* override config-file values; see
gradebox.config for the full key list.
"""

import argparse
from pathlib import Path

import uvicorn

from gradebox.config import load_config
from gradebox.service import create_app

FRONTEND_DIR = Path(__file__).resolve().parent.parent / "frontend"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=None, help="path to a JSON config file")
    args = parser.parse_args()

    config = load_config(args.config)
    app = create_app(config)
    if (FRONTEND_DIR / "dist").is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=FRONTEND_DIR, html=True), name="ui")
        print("frontend mounted at /ui (open /ui/public/lesson.html)")
    uvicorn.run(app, host=config.listen_host, port=config.listen_port)


if __name__ == "__main__":
    main()
