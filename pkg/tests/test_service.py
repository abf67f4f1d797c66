"""Wire protocol codec and the live TCP pilot service."""

import asyncio
import json

import pytest

from exogait.behaviors import Behavior
from exogait.engine import StepEngine
from exogait.protocol import (
    Hello,
    MalformedMessage,
    SelectBehavior,
    SetParams,
    Trigger,
    decode_command,
    decode_line,
    encode,
    encode_command,
    encode_state,
    error_message,
)
from exogait.service import PilotService


class TestCodec:
    def test_command_round_trips(self):
        for cmd in (
            Trigger(seq=7),
            SelectBehavior(Behavior.flat_walk(), seq=1),
            SelectBehavior(Behavior.stepping_stones(0.5), seq=2),
            SetParams("stairs", seq=3),
            Hello(role="observer", seq=4),
        ):
            assert decode_command(encode_command(cmd)) == cmd

    def test_version_field_mandatory(self):
        with pytest.raises(MalformedMessage):
            decode_line('{"type":"trigger"}')
        with pytest.raises(MalformedMessage):
            decode_line('{"v":99,"type":"trigger"}')

    def test_unknown_fields_ignored(self):
        cmd = decode_command('{"v":1,"type":"trigger","seq":3,"future_field":true}')
        assert cmd == Trigger(seq=3)

    def test_garbage_rejected(self):
        for line in (b"\xff\xfe", "not json", "[1,2]", '{"v":1}', '{"v":1,"type":"warp"}'):
            with pytest.raises(MalformedMessage):
                decode_command(line)

    def test_state_message_fields(self):
        engine = StepEngine()
        engine.select_behavior(Behavior.flat_walk())
        msg = encode_state(engine.state(), seq=5)
        assert msg["type"] == "state"
        for key in (
            "phase",
            "phase_elapsed",
            "remaining_step_time",
            "in_trigger_window",
            "trigger_window_s",
            "left_hip",
            "right_ankle",
            "left_foot_x",
            "hip_x",
            "behavior",
            "step_count",
        ):
            assert key in msg
        line = encode(msg)
        parsed = json.loads(line)
        assert parsed["v"] == 1 and parsed["behavior"] == "flat_walk"

    def test_state_round_trip_is_json_clean(self):
        engine = StepEngine()
        msg = encode_state(engine.state())
        assert json.loads(encode(msg))["phase"] == "standing"

    def test_error_message(self):
        msg = error_message("boom", 9)
        assert msg == {"type": "error", "message": "boom", "seq": 9}


class _Client:
    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer

    @classmethod
    async def connect(cls, port):
        reader, writer = await asyncio.open_connection("127.0.0.1", port)
        return cls(reader, writer)

    async def recv(self, want_type=None, timeout=5.0):
        while True:
            line = await asyncio.wait_for(self.reader.readline(), timeout)
            assert line, "connection closed"
            msg = json.loads(line)
            if want_type is None or msg["type"] == want_type:
                return msg

    async def send(self, payload: dict):
        self.writer.write((json.dumps({"v": 1, **payload}) + "\n").encode())
        await self.writer.drain()

    async def close(self):
        self.writer.close()


async def _with_service(service, coro):
    await service.start("127.0.0.1", 0)
    try:
        await coro(service)
    finally:
        await service.stop()


def run_service_test(coro):
    service = PilotService(dt=0.002, rate=50.0, time_scale=10.0)
    asyncio.run(_with_service(service, coro))


class TestLiveService:
    def test_snapshot_on_connect(self):
        async def scenario(service):
            client = await _Client.connect(service.bound_port)
            msg = await client.recv()
            assert msg["type"] == "state"
            assert msg["phase"] == "standing"
            assert msg["behavior"] == "stand"
            await client.close()

        run_service_test(scenario)

    def test_trigger_flow_and_acks(self):
        async def scenario(service):
            client = await _Client.connect(service.bound_port)
            await client.recv("state")
            await client.send({"type": "hello", "role": "controller", "seq": 1})
            hello = await client.recv("hello")
            assert hello["role"] == "controller"
            assert "geometry" in hello and hello["geometry"]["thigh_length"] > 0

            await client.send({"type": "behavior", "name": "flat_walk", "seq": 2})
            await client.send({"type": "trigger", "seq": 3})
            ack = await client.recv("trigger_ack")
            assert ack["seq"] == 3 and ack["accepted"] is True

            # Mid-swing, outside the window: rejected with accepted=false.
            while True:
                state = await client.recv("state")
                if (
                    state["phase"] == "swing"
                    and state["remaining_step_time"] is not None
                    and state["remaining_step_time"] > 0.4
                ):
                    break
            await client.send({"type": "trigger", "seq": 4})
            ack = await client.recv("trigger_ack")
            assert ack["seq"] == 4 and ack["accepted"] is False
            await client.close()

        run_service_test(scenario)

    def test_second_controller_downgraded_to_observer(self):
        async def scenario(service):
            first = await _Client.connect(service.bound_port)
            await first.recv("state")
            await first.send({"type": "hello", "role": "controller", "seq": 1})
            assert (await first.recv("hello"))["role"] == "controller"

            second = await _Client.connect(service.bound_port)
            await second.recv("state")
            await second.send({"type": "hello", "role": "controller", "seq": 1})
            hello = await second.recv("hello")
            assert hello["role"] == "observer"
            assert "note" in hello

            # Observer commands are refused but the session stays open.
            await second.send({"type": "trigger", "seq": 2})
            err = await second.recv("error")
            assert "observer" in err["message"]
            assert (await second.recv("state"))["type"] == "state"
            await first.close()
            await second.close()

        run_service_test(scenario)

    def test_malformed_input_keeps_session_open(self):
        async def scenario(service):
            client = await _Client.connect(service.bound_port)
            await client.recv("state")
            client.writer.write(b"this is not json\n")
            await client.writer.drain()
            err = await client.recv("error")
            assert "malformed" in err["message"]
            # Still streaming states afterwards.
            assert (await client.recv("state"))["type"] == "state"
            await client.close()

        run_service_test(scenario)

    def test_behavior_error_surfaced(self):
        async def scenario(service):
            client = await _Client.connect(service.bound_port)
            await client.recv("state")
            await client.send({"type": "hello", "role": "controller", "seq": 1})
            await client.recv("hello")
            # Descent without reorientation: engine refuses, error surfaced.
            await client.send({"type": "behavior", "name": "stairs_down", "seq": 2})
            err = await client.recv("error")
            assert err["seq"] == 2
            assert "reorient" in err["message"]
            await client.close()

        run_service_test(scenario)

    def test_params_command(self):
        async def scenario(service):
            client = await _Client.connect(service.bound_port)
            await client.recv("state")
            await client.send({"type": "hello", "role": "controller", "seq": 1})
            await client.recv("hello")
            await client.send({"type": "params", "name": "stairs", "seq": 2})
            while True:
                state = await client.recv("state")
                if state["params_name"] == "stairs":
                    break
            await client.send({"type": "params", "name": "moonwalk", "seq": 3})
            err = await client.recv("error")
            assert err["seq"] == 3
            await client.close()

        run_service_test(scenario)

    def test_commands_applied_in_order(self):
        async def scenario(service):
            client = await _Client.connect(service.bound_port)
            await client.recv("state")
            await client.send({"type": "hello", "role": "controller", "seq": 1})
            await client.recv("hello")
            # behavior then trigger, back to back: ack must reflect the
            # behavior having been applied first.
            await client.send({"type": "behavior", "name": "flat_walk", "seq": 2})
            await client.send({"type": "trigger", "seq": 3})
            ack = await client.recv("trigger_ack")
            assert ack["accepted"] is True
            await client.close()

        run_service_test(scenario)
