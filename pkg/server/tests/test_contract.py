"""Protocol contract against a live server, driven by the primary client.

This is the secondary acceptance check: the echo server round-trips a
17x64x64x3 float32 tensor byte-exactly (identity codec endpoints), and the
primary package's RemoteDenoiser pointed at the echo server receives zero
tensors matching the local expectation.
"""

import json
import threading
import time

import numpy as np
import pytest
import requests
import uvicorn

from ctrack_server.app import ServerConfig, create_app


@pytest.fixture(scope="module")
def endpoint():
    server = uvicorn.Server(uvicorn.Config(create_app(ServerConfig()),
                                           host="127.0.0.1", port=0,
                                           log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10.0
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("server failed to start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5.0)


def test_acceptance_tensor_roundtrip_byte_exact(endpoint):
    rng = np.random.default_rng(0)
    tensor = rng.normal(size=(17, 64, 64, 3)).astype("<f4")
    original = tensor.tobytes()
    header = json.dumps({"protocol": "1", "shape": [17, 64, 64, 3],
                         "dtype": "f32"}).encode() + b"\n"

    enc = requests.post(endpoint + "/v1/encode", data=header + original)
    assert enc.status_code == 200
    latent = enc.content[enc.content.find(b"\n") + 1:]
    dec = requests.post(endpoint + "/v1/decode", data=header + latent)
    assert dec.status_code == 200
    back = dec.content[dec.content.find(b"\n") + 1:]
    assert back == original
    print("\nACCEPTANCE protocol-roundtrip: PASS "
          f"({len(original)} bytes, byte-exact)")


def test_roundtrip_through_primary_client(endpoint):
    from ctrack.remote import RemoteDenoiser

    client = RemoteDenoiser(endpoint)
    tensor = np.random.default_rng(3).normal(size=(17, 64, 64, 3)) \
        .astype("<f4")
    back = client.decode(client.encode(tensor))
    assert back.tobytes() == tensor.tobytes()


def test_acceptance_remote_denoiser_gets_zero_tensors(endpoint):
    from ctrack import Conditioning
    from ctrack.remote import RemoteDenoiser

    client = RemoteDenoiser(endpoint)
    info = client.check_health()
    assert info["model_name"] == "echo"

    frame = np.random.default_rng(1).integers(0, 256, size=(64, 64, 3),
                                              dtype=np.uint8)
    conds = [Conditioning(frame, "edited"), Conditioning(frame, "unedited")]
    x_t = np.random.default_rng(2).normal(size=(17, 64, 64, 3))
    out = client.epsilon_many(x_t, 25, conds)
    assert len(out) == 2
    for eps in out:
        assert eps.shape == x_t.shape
        np.testing.assert_array_equal(eps, np.zeros_like(x_t))
    print("\nACCEPTANCE remote-denoiser-echo: PASS "
          "(two conditionings, zero tensors, shapes preserved)")
