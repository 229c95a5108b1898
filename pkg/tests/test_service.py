import json
import threading
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from roadsense.errors import BundleLoadError, MalformedRow, NonMonotonicTime
from roadsense.service import classify_batch, encode_response, make_server, serve
from roadsense.service.bundle import write_bundle
from roadsense.service.classify import samples_from_json, samples_to_json
from roadsense.service.server import BUNDLE_ENV, resolve_bundle_path
from roadsense.telemetry import SynthConfig, synth_drive


def batch(n, regime="good", seed=0):
    log, _, _ = synth_drive(SynthConfig(duration_s=n / 5, segments=((n / 5, regime),), rng_seed=seed))
    return log


@pytest.fixture(scope="module")
def server(trained):
    srv = make_server(trained[0], port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{srv.server_address[1]}"
    srv.shutdown()
    srv.server_close()


def request(url, body=None, raw=None):
    data = raw if raw is not None else (None if body is None else json.dumps(body).encode())
    req = urllib.request.Request(url, data=data, headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=10) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read()


def test_interval_counts(trained):
    resp = classify_batch(trained[0], batch(50))
    assert len(resp["road"]) == 2 and len(resp["potholes"]) == 5
    assert resp["dropped_samples"] == 0
    resp = classify_batch(trained[0], batch(9))
    assert resp == {"road": [], "potholes": [], "dropped_samples": 9}
    resp = classify_batch(trained[0], np.zeros((0, 10)))
    assert resp == {"road": [], "potholes": [], "dropped_samples": 0}


def test_intervals_partition_consumed_prefix(trained):
    log = batch(57)
    resp = classify_batch(trained[0], log)
    for key, size in (("road", 25), ("potholes", 10)):
        spans = resp[key]
        assert spans[0]["start_t"] == log.t[0]
        for a, b in zip(spans, spans[1:]):
            assert a["end_t"] == b["start_t"]
        assert spans[-1]["end_t"] == log.t[len(spans) * size]
    assert resp["dropped_samples"] == 7


def test_good_vs_bad_batches(trained):
    bundle = trained[0]
    good = classify_batch(bundle, batch(250, "good", seed=100))
    bad = classify_batch(bundle, batch(250, "bad", seed=101))
    assert {w["label"] for w in good["road"]} == {"good"}
    assert {w["label"] for w in bad["road"]} == {"bad"}


def test_scores_consistent_with_labels(trained):
    bundle = trained[0]
    resp = classify_batch(bundle, batch(300, "bad", seed=3))
    tau = bundle.pothole_model.threshold
    for w in resp["potholes"]:
        assert (w["label"] == "pothole") == (w["score"] >= tau)
    for w in resp["road"]:
        assert (w["label"] == "bad") == (w["score"] >= 0)


def test_non_monotonic_batch(trained):
    data = batch(30).data.copy()
    data[5, 0] = data[3, 0]
    with pytest.raises(NonMonotonicTime):
        classify_batch(trained[0], data)


def test_json_sample_codec():
    data = batch(12).data
    assert (samples_from_json(samples_to_json(data)) == data).all()
    with pytest.raises(MalformedRow) as exc:
        samples_from_json([{"t": 0}, {}])
    assert exc.value.where == 0
    with pytest.raises(MalformedRow):
        samples_from_json({"t": 0})


def test_health(server, trained):
    status, body = request(server + "/v1/health")
    assert status == 200
    assert json.loads(body) == {"status": "ok", "model_version": trained[0].model_version}


def test_classify_endpoint_matches_offline(server, trained):
    log = batch(50, seed=8)
    status, body = request(server + "/v1/classify", {"samples": samples_to_json(log.data)})
    assert status == 200
    resp = json.loads(body)
    assert len(resp["road"]) == 2 and len(resp["potholes"]) == 5
    assert body.decode() == encode_response(classify_batch(trained[0], log))


def test_decreasing_timestamps_422(server):
    samples = samples_to_json(batch(20).data)
    samples[4]["t"] = samples[2]["t"] - 1
    status, body = request(server + "/v1/classify", {"samples": samples})
    assert status == 422
    err = json.loads(body)["error"]
    assert err["code"] == "non_monotonic_time" and err["line_or_index"] == 4


@pytest.mark.parametrize(
    "raw",
    [b"{not json", b'{"rows": []}', b'{"samples": [{"t": 1}]}', b'{"samples": 3}', b"[]"],
)
def test_malformed_requests_400(server, raw):
    status, body = request(server + "/v1/classify", raw=raw)
    assert status == 400
    assert set(json.loads(body)["error"]) == {"code", "message", "line_or_index"}


def test_unknown_route(server):
    assert request(server + "/v2/health")[0] == 404


def test_concurrent_identical_requests(server):
    body = {"samples": samples_to_json(batch(500, "bad", seed=4).data)}
    with ThreadPoolExecutor(8) as pool:
        results = list(pool.map(lambda _: request(server + "/v1/classify", body), range(8)))
    assert all(status == 200 for status, _ in results)
    assert len({payload for _, payload in results}) == 1


def test_bundle_path_resolution(monkeypatch):
    monkeypatch.setenv(BUNDLE_ENV, "/env/bundle.json")
    assert resolve_bundle_path(None) == "/env/bundle.json"
    assert resolve_bundle_path("/flag.json") == "/flag.json"
    monkeypatch.delenv(BUNDLE_ENV)
    with pytest.raises(BundleLoadError):
        resolve_bundle_path(None)


def test_serve_refuses_bad_bundle(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(BundleLoadError):
        serve(port=0, bundle_path=str(bad))


def test_serve_loads_bundle_from_env(trained, tmp_path, monkeypatch):
    from roadsense.service import server as server_mod

    path = tmp_path / "bundle.json"
    write_bundle(trained[0], path)
    monkeypatch.setenv(BUNDLE_ENV, str(path))
    started = {}

    class Probe(server_mod.ClassificationServer):
        def serve_forever(self, poll_interval=0.5):
            started["version"] = self.model_version

    monkeypatch.setattr(server_mod, "ClassificationServer", Probe)
    server_mod.serve(port=0)
    assert started["version"] == trained[0].model_version
