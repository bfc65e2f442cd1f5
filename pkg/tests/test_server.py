import json
import threading
import urllib.error
import urllib.request

import pytest

from smartbuilding.core import ReadingKind, ServiceId
from smartbuilding.devices import Scenario, SensorMode, SensorSpec
from smartbuilding.hetnet import LinkKind
from smartbuilding.runtime import Runtime
from smartbuilding.server import BmsServer


def small_scenario(duration_ms=10_000):
    sensors = (
        SensorSpec("iaq-1", ReadingKind.iaq_ppm, SensorMode.generator, base=120, noise=5),
        SensorSpec("soil-1", ReadingKind.soil_moisture_pct, SensorMode.generator, base=40),
    )
    return Scenario(name="srv", seed=7, duration_ms=duration_ms, tick_ms=1000,
                    sensors=sensors, actuators=(), records=(),
                    wall_start="2022-11-01T07:00:00")


@pytest.fixture()
def served():
    runtime = Runtime(small_scenario())
    server = BmsServer(("127.0.0.1", 0), runtime)
    thread = threading.Thread(target=server.serve_forever,
                              kwargs={"poll_interval": 0.05}, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    yield runtime, base
    server.shutdown()
    server.server_close()


def get(url, timeout=5):
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        return resp.status, resp.read().decode("utf-8")


def post(url, doc=None, raw=None, timeout=5):
    data = raw if raw is not None else json.dumps(doc or {}).encode("utf-8")
    req = urllib.request.Request(url, data=data, method="POST")
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        return resp.status, resp.read().decode("utf-8")


class TestUpdateEndpoint:
    def test_write_returns_incrementing_entry_ids(self, served):
        runtime, base = served
        status, body = get(f"{base}/update?api_key=WKEY1GARDEN&field1=23.5")
        assert (status, body) == (200, "1")
        runtime.step()  # advance sim time past the rate-limit window
        status, body = get(f"{base}/update?api_key=WKEY1GARDEN&field1=24.0")
        assert (status, body) == (200, "2")

    def test_bad_key_and_rate_limit_both_answer_zero(self, served):
        runtime, base = served
        assert get(f"{base}/update?api_key=WRONG&field1=1")[1] == "0"
        assert get(f"{base}/update?api_key=WKEY1GARDEN&field1=1")[1] == "1"
        # same sim instant: denied
        assert get(f"{base}/update?api_key=WKEY1GARDEN&field1=2")[1] == "0"

    def test_post_form_body_works(self, served):
        _, base = served
        status, body = post(f"{base}/update",
                            raw=b"api_key=WKEY2SAFETY&field1=0&field2=150")
        assert (status, body) == (200, "1")


class TestFeedEndpoint:
    def test_feed_roundtrip(self, served):
        runtime, base = served
        get(f"{base}/update?api_key=WKEY1GARDEN&field1=23.5")
        status, body = get(f"{base}/channels/1/feeds.json?api_key=RKEY1GARDEN")
        assert status == 200
        doc = json.loads(body)
        assert doc["channel"]["field1"] == "soil_pct"
        assert doc["feeds"][0]["field1"] == "23.5"

    def test_wrong_read_key_is_401(self, served):
        _, base = served
        with pytest.raises(urllib.error.HTTPError) as err:
            get(f"{base}/channels/1/feeds.json?api_key=NOPE")
        assert err.value.code == 401

    def test_unknown_channel_is_404(self, served):
        _, base = served
        with pytest.raises(urllib.error.HTTPError) as err:
            get(f"{base}/channels/99/feeds.json?api_key=RKEY1GARDEN")
        assert err.value.code == 404

    def test_results_filter(self, served):
        runtime, base = served
        for i in range(3):
            get(f"{base}/update?api_key=WKEY1GARDEN&field1={i}")
            runtime.step()
        status, body = get(f"{base}/channels/1/feeds.json?api_key=RKEY1GARDEN&results=1")
        doc = json.loads(body)
        assert [r["entry_id"] for r in doc["feeds"]] == [3]


class TestCommandEndpoint:
    def test_command_is_accepted_and_applied_next_tick(self, served):
        runtime, base = served
        status, body = post(f"{base}/api/command",
                            {"service": "door", "action": "open"})
        assert status == 202
        doc = json.loads(body)
        assert doc["accepted"] is True
        assert doc["origin"] == "wifi"  # ingress link stamps the origin
        runtime.step()
        assert runtime.snapshot()["actuators"]["door-servo"]["value"] == 90

    def test_voice_origin_is_preserved(self, served):
        _, base = served
        status, body = post(f"{base}/api/command",
                            {"service": "lighting", "action": "set_rgb",
                             "params": {"rgb": [10, 20, 30]}, "origin": "voice"})
        assert json.loads(body)["origin"] == "voice"

    def test_unknown_service_is_400(self, served):
        _, base = served
        with pytest.raises(urllib.error.HTTPError) as err:
            post(f"{base}/api/command", {"service": "sauna", "action": "on"})
        assert err.value.code == 400

    def test_command_after_the_run_finished_is_409(self, served):
        runtime, base = served
        runtime.run()
        with pytest.raises(urllib.error.HTTPError) as err:
            post(f"{base}/api/command", {"service": "door", "action": "open"})
        assert err.value.code == 409

    def test_link_down_is_503(self, served):
        runtime, base = served
        runtime.links.set_available(LinkKind.wifi, False, runtime._clock)
        with pytest.raises(urllib.error.HTTPError) as err:
            post(f"{base}/api/command", {"service": "door", "action": "open"})
        assert err.value.code == 503
        # another ingress still works
        status, body = post(f"{base}/api/command",
                            {"service": "door", "action": "open", "via": "bluetooth"})
        assert status == 202
        assert json.loads(body)["origin"] == "bluetooth"


class TestEventsEndpoint:
    def test_snapshot_dump_without_follow(self, served):
        runtime, base = served
        for _ in range(3):
            runtime.step()
        status, body = get(f"{base}/api/events?after=0&follow=0")
        assert status == 200
        seqs = [json.loads(line)["seq"] for line in body.splitlines()]
        assert seqs == list(range(1, len(seqs) + 1))
        assert len(seqs) == runtime.bus.last_seq

    def test_after_filters_old_events(self, served):
        runtime, base = served
        runtime.step()
        runtime.step()
        cut = runtime.bus.last_seq
        runtime.step()
        _, body = get(f"{base}/api/events?after={cut}&follow=0")
        seqs = [json.loads(line)["seq"] for line in body.splitlines()]
        assert seqs and seqs[0] == cut + 1

    def test_follow_streams_until_the_run_finishes(self, served):
        runtime, base = served
        collected = []

        def consume():
            with urllib.request.urlopen(f"{base}/api/events?after=0", timeout=10) as resp:
                for line in resp:
                    collected.append(json.loads(line))

        reader = threading.Thread(target=consume, daemon=True)
        reader.start()
        runtime.run()
        reader.join(timeout=10)
        assert not reader.is_alive()
        assert [d["seq"] for d in collected] == list(range(1, runtime.bus.last_seq + 1))


class TestStatusAndSnapshot:
    def test_snapshot_shape(self, served):
        runtime, base = served
        runtime.step()
        _, body = get(f"{base}/api/snapshot")
        doc = json.loads(body)
        assert set(doc) >= {"t", "seq", "services", "actuators", "links", "channels"}

    def test_status_reports_store_health(self, served):
        _, base = served
        _, body = get(f"{base}/api/status")
        doc = json.loads(body)
        assert doc["status"] == "ok"
        assert doc["store"]["degraded"] is False

    def test_unknown_path_is_404(self, served):
        _, base = served
        with pytest.raises(urllib.error.HTTPError) as err:
            get(f"{base}/api/nope")
        assert err.value.code == 404


class TestCrossOrigin:
    def test_responses_allow_any_origin(self, served):
        _, base = served
        with urllib.request.urlopen(f"{base}/api/status", timeout=5) as resp:
            assert resp.headers["Access-Control-Allow-Origin"] == "*"

    def test_preflight_admits_json_posts(self, served):
        _, base = served
        req = urllib.request.Request(f"{base}/api/command", method="OPTIONS")
        with urllib.request.urlopen(req, timeout=5) as resp:
            assert resp.status == 204
            assert "POST" in resp.headers["Access-Control-Allow-Methods"]
            assert resp.headers["Access-Control-Allow-Headers"] == "Content-Type"
