"""TCP service exposing the step engine to a live pilot console.

One duplex socket per session; newline-delimited JSON messages (see
``protocol``).  At most one session holds the controller role (a second
controller request is downgraded to observer); any number of observers may
watch.  All engine mutations flow through one serialized command queue and
are applied between ticks in arrival order, so the engine stays
deterministic and never blocks on the network: each session has a bounded
outbox and slow consumers lose stream frames, never tick time.
"""

from __future__ import annotations

import asyncio
import contextlib
import time

from .engine import StepEngine
from .geometry import JointLimits, LegGeometry
from .parameters import ParameterStore
from .protocol import (
    Hello,
    MalformedMessage,
    SelectBehavior,
    SetParams,
    Trigger,
    decode_command,
    encode,
    encode_state,
    error_message,
)

#: Per-session outbox depth; the engine drops frames beyond it.
OUTBOX_DEPTH = 64


class _Session:
    _next_id = 0

    def __init__(self, writer: asyncio.StreamWriter):
        _Session._next_id += 1
        self.id = _Session._next_id
        self.writer = writer
        self.role = "observer"
        self.outbox: asyncio.Queue[str | None] = asyncio.Queue(maxsize=OUTBOX_DEPTH)
        self.dropped_frames = 0

    def send(self, message: dict) -> None:
        """Queue a message without blocking; drop state frames when full."""
        try:
            self.outbox.put_nowait(encode(message))
        except asyncio.QueueFull:
            self.dropped_frames += 1


class PilotService:
    """Serves one engine to controller/observer sessions."""

    def __init__(
        self,
        engine: StepEngine | None = None,
        geom: LegGeometry | None = None,
        limits: JointLimits | None = None,
        store: ParameterStore | None = None,
        dt: float = 0.002,
        rate: float = 50.0,
        time_scale: float = 1.0,
    ):
        self.engine = engine or StepEngine(geom=geom, limits=limits, store=store, dt=dt)
        if rate <= 0.0:
            raise ValueError(f"rate must be > 0, got {rate}")
        self.rate = rate
        self.time_scale = time_scale
        self._stride = max(1, round(1.0 / (self.engine.dt * rate)))
        self._sessions: dict[int, _Session] = {}
        self._controller: _Session | None = None
        self._commands: asyncio.Queue[tuple[_Session, object]] = asyncio.Queue()
        self._server: asyncio.base_events.Server | None = None
        self._engine_task: asyncio.Task | None = None
        self._state_seq = 0
        self.bound_port: int | None = None

    # ------------------------------------------------------------- lifecycle

    async def start(self, host: str, port: int) -> None:
        self._server = await asyncio.start_server(self._handle_session, host, port)
        self.bound_port = self._server.sockets[0].getsockname()[1]
        self._engine_task = asyncio.create_task(self._engine_loop())

    async def stop(self) -> None:
        if self._engine_task is not None:
            self._engine_task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await self._engine_task
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        for session in list(self._sessions.values()):
            session.send({"type": "error", "message": "server shutting down"})
            with contextlib.suppress(Exception):
                session.writer.close()

    async def serve_until_cancelled(self, host: str, port: int) -> None:
        await self.start(host, port)
        try:
            await asyncio.Event().wait()
        finally:
            await self.stop()

    # ------------------------------------------------------------ engine side

    async def _engine_loop(self) -> None:
        dt_wall = self.engine.dt / self.time_scale
        next_deadline = time.monotonic() + dt_wall
        tick_index = 0
        while True:
            self._apply_pending_commands()
            try:
                state, _ = self.engine.tick()
            except Exception as exc:  # planner infeasibility surfaces here
                self.engine.clear_pending()
                self._broadcast(error_message(f"step aborted: {exc}"))
                state = self.engine.state()
            tick_index += 1
            if tick_index % self._stride == 0:
                self._state_seq += 1
                self._broadcast(encode_state(state, seq=self._state_seq))
            delay = next_deadline - time.monotonic()
            next_deadline += dt_wall
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                await asyncio.sleep(0)  # behind schedule: yield, never block

    def _apply_pending_commands(self) -> None:
        while True:
            try:
                session, command = self._commands.get_nowait()
            except asyncio.QueueEmpty:
                return
            self._apply_command(session, command)

    def _apply_command(self, session: _Session, command: object) -> None:
        if isinstance(command, Hello):
            self._apply_hello(session, command)
            return
        if session.role != "controller":
            session.send(
                error_message("observer sessions cannot command the engine", command.seq)
            )
            return
        if isinstance(command, Trigger):
            accepted = self.engine.trigger()
            session.send({"type": "trigger_ack", "seq": command.seq, "accepted": accepted})
        elif isinstance(command, SelectBehavior):
            try:
                self.engine.select_behavior(command.behavior)
            except Exception as exc:
                session.send(error_message(str(exc), command.seq))
        elif isinstance(command, SetParams):
            try:
                self.engine.set_parameters(command.name)
            except Exception as exc:
                session.send(error_message(str(exc), command.seq))
        else:
            session.send(error_message(f"unsupported command {command!r}", None))

    def _apply_hello(self, session: _Session, hello: Hello) -> None:
        role = hello.role
        note = None
        if role == "controller":
            if self._controller is None or self._controller is session:
                self._controller = session
            else:
                role = "observer"
                note = "another controller is active; joined as observer"
        session.role = role
        msg = {
            "type": "hello",
            "seq": hello.seq,
            "role": role,
            "rate_hz": self.rate,
            "geometry": {
                "thigh_length": self.engine.geom.thigh_length,
                "shank_length": self.engine.geom.shank_length,
                "foot_forward_length": self.engine.geom.foot_forward_length,
                "ankle_height": self.engine.geom.ankle_height,
            },
            "param_sets": self.engine.store.names(),
        }
        if note:
            msg["note"] = note
        session.send(msg)

    def _broadcast(self, message: dict) -> None:
        for session in self._sessions.values():
            session.send(message)

    # ----------------------------------------------------------- session side

    async def _handle_session(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        session = _Session(writer)
        self._sessions[session.id] = session
        sender = asyncio.create_task(self._sender_loop(session))
        # Sync-on-connect: the first message every client sees is a full
        # state snapshot.
        self._state_seq += 1
        session.send(encode_state(self.engine.state(), seq=self._state_seq))
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                if not line.strip():
                    continue
                try:
                    command = decode_command(line)
                except MalformedMessage as exc:
                    session.send(error_message(f"malformed message: {exc}"))
                    continue
                await self._commands.put((session, command))
        except (ConnectionResetError, asyncio.IncompleteReadError):
            pass
        finally:
            self._sessions.pop(session.id, None)
            if self._controller is session:
                self._controller = None
            sender.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await sender
            with contextlib.suppress(Exception):
                writer.close()

    async def _sender_loop(self, session: _Session) -> None:
        while True:
            line = await session.outbox.get()
            if line is None:
                return
            try:
                session.writer.write(line.encode("utf-8") + b"\n")
                await session.writer.drain()
            except (ConnectionResetError, BrokenPipeError, RuntimeError):
                return


async def serve_forever(
    host: str,
    port: int,
    geom: LegGeometry | None = None,
    store: ParameterStore | None = None,
    dt: float = 0.002,
    rate: float = 50.0,
    time_scale: float = 1.0,
) -> None:
    service = PilotService(geom=geom, store=store, dt=dt, rate=rate, time_scale=time_scale)
    await service.start(host, port)
    print(f"exogait pilot service listening on {host}:{service.bound_port} (stream {rate:g} Hz)", flush=True)
    try:
        await asyncio.Event().wait()
    finally:
        await service.stop()
