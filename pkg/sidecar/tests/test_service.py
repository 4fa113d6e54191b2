import pytest
from fastapi.testclient import TestClient

from sidecar import ServiceConfig, create_app
from sidecar.cli import build_parser


def make_client(**kwargs):
    kwargs.setdefault("echo_mode", True)
    return TestClient(create_app(ServiceConfig(**kwargs)))


class TestCapabilities:
    def test_echo_declarations(self):
        caps = make_client().get("/v1/capabilities").json()
        assert caps == {
            "views": ["softmax", "class_score", "hidden", "embedding"],
            "classes": ["negative", "positive"],
            "hidden_dim": 16,
            "max_batch": 64,
        }

    def test_custom_echo_classes(self):
        client = make_client(echo_classes=("contradiction", "entailment", "neutral"))
        caps = client.get("/v1/capabilities").json()
        assert caps["classes"] == ["contradiction", "entailment", "neutral"]
        resp = client.post("/v1/score", json={"texts": ["x"], "views": [{"kind": "softmax"}]})
        assert resp.json()["results"][0]["softmax"] == [1 / 3, 1 / 3, 1 / 3]


class TestValidation:
    def test_unknown_view_is_400(self):
        resp = make_client().post(
            "/v1/score", json={"texts": ["x"], "views": [{"kind": "attention"}]}
        )
        assert resp.status_code == 400

    def test_bad_body_is_400(self):
        client = make_client()
        assert client.post("/v1/score", json={"texts": "x"}).status_code == 400
        assert client.post("/v1/score", json={"texts": ["x"], "views": []}).status_code == 400
        assert (
            client.post("/v1/score", content=b"not json", headers={"Content-Type": "application/json"}).status_code
            == 400
        )

    def test_unknown_class_label_is_400(self):
        resp = make_client().post(
            "/v1/score",
            json={"texts": ["x"], "views": [{"kind": "class_score", "label": "mystery"}]},
        )
        assert resp.status_code == 400

    def test_overlong_batch_is_429(self):
        client = make_client(max_batch=2)
        resp = client.post(
            "/v1/score", json={"texts": ["a", "b", "c"], "views": [{"kind": "softmax"}]}
        )
        assert resp.status_code == 429

    def test_span_validation(self):
        client = make_client()
        for spans in ([[2, 2]], [[-1, 3]], [[0]], "nope", []):
            resp = client.post(
                "/v1/score",
                json={"texts": ["x"], "views": [{"kind": "hidden", "layer": -1, "spans": spans}]},
            )
            assert resp.status_code == 400, spans


class TestLayerPolicy:
    def test_last_n_restricts_layers(self):
        client = make_client(layer_policy="last:2")
        ok = client.post(
            "/v1/score",
            json={"texts": ["x"], "views": [{"kind": "hidden", "layer": -2, "spans": [[0, 1]]}]},
        )
        assert ok.status_code == 200
        deep = client.post(
            "/v1/score",
            json={"texts": ["x"], "views": [{"kind": "hidden", "layer": -5, "spans": [[0, 1]]}]},
        )
        assert deep.status_code == 400

    def test_out_of_range_layer(self):
        resp = make_client().post(
            "/v1/score",
            json={"texts": ["x"], "views": [{"kind": "hidden", "layer": 99, "spans": [[0, 1]]}]},
        )
        assert resp.status_code == 400

    def test_positive_layer_indices_allowed(self):
        resp = make_client().post(
            "/v1/score",
            json={"texts": ["x"], "views": [{"kind": "hidden", "layer": 3, "spans": [[0, 1]]}]},
        )
        assert resp.status_code == 200


class TestConfig:
    def test_requires_checkpoint_or_echo(self):
        with pytest.raises(ValueError):
            ServiceConfig()

    def test_bad_layer_policy(self):
        with pytest.raises(ValueError):
            ServiceConfig(echo_mode=True, layer_policy="first:3")
        with pytest.raises(ValueError):
            ServiceConfig(echo_mode=True, layer_policy="last:0")

    def test_layer_allowed(self):
        config = ServiceConfig(echo_mode=True, layer_policy="last:3")
        assert config.layer_allowed(-1, 13)
        assert config.layer_allowed(-3, 13)
        assert not config.layer_allowed(-4, 13)
        assert config.layer_allowed(12, 13)  # == -1
        assert not config.layer_allowed(5, 13)


class TestCli:
    def test_flags_parse(self):
        args = build_parser().parse_args(
            ["--echo", "--port", "9001", "--layer-policy", "last:4", "--max-batch", "8"]
        )
        assert args.echo and args.port == 9001
        assert args.layer_policy == "last:4" and args.max_batch == 8

    def test_checkpoint_flag(self):
        args = build_parser().parse_args(["--checkpoint", "some/checkpoint"])
        assert args.checkpoint == "some/checkpoint" and not args.echo


class TestInterop:
    def test_morphcheck_client_against_live_service(self):
        """End-to-end: the library's HTTP adapter scoring through a real
        socket served by this service in echo mode."""
        import threading
        import time

        import uvicorn

        pytest.importorskip("morphcheck")
        from morphcheck.adapters import HttpPort
        from morphcheck.core import TextInput, ViewRequest

        app = create_app(ServiceConfig(echo_mode=True))
        server = uvicorn.Server(
            uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
        )
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        deadline = time.time() + 10
        while not server.started:
            if time.time() > deadline:
                pytest.fail("service did not start")
            time.sleep(0.02)
        port_num = server.servers[0].sockets[0].getsockname()[1]
        try:
            port = HttpPort(f"http://127.0.0.1:{port_num}")
            caps = port.capabilities()
            assert caps.hidden_dim == 16
            hidden = ViewRequest(kind="hidden", layer=-2, spans=((0, 2), (3, 5)))
            (row,) = port.score_batch(
                [TextInput(id="x", text="ab cd")],
                [ViewRequest(kind="softmax"), hidden],
            )
            assert row[0].values == (0.5, 0.5)
            assert row[1].values == (0.0,) * 32
        finally:
            server.should_exit = True
            thread.join(timeout=10)
