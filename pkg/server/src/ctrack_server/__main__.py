"""Run the denoiser server: python -m ctrack_server [--model echo] ..."""

import argparse

import uvicorn

from .app import MODEL_ADAPTERS, ServerConfig, create_app


def main():
    parser = argparse.ArgumentParser(description="ctrack denoiser server")
    parser.add_argument("--model", default="echo",
                        choices=sorted(MODEL_ADAPTERS))
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8601)
    parser.add_argument("--max-tensor-mb", type=int, default=256)
    args = parser.parse_args()

    config = ServerConfig(model=args.model, device=args.device,
                          max_tensor_bytes=args.max_tensor_mb * 2 ** 20)
    uvicorn.run(create_app(config), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
