// Browser bootstrap: wires the view model to a WebSocket (via the bundled
// WS<->TCP bridge), the canvas, and the control strip.

import { ConsoleViewModel } from "./viewmodel.js";
import { Camera, computeFigure, computeTerrain, drawScene } from "./stickfigure.js";

const BEHAVIORS = [
  "flat_walk",
  "stairs_up",
  "stairs_down",
  "ramp_up",
  "ramp_down",
  "stepping_stones",
] as const;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function nowS(): number {
  return performance.now() / 1000;
}

export function startApp(): void {
  const canvas = el<HTMLCanvasElement>("scene");
  const maybeCtx = canvas.getContext("2d");
  if (!maybeCtx) throw new Error("canvas 2d context unavailable");
  const ctx = maybeCtx;

  const wsUrl = `ws://${location.host}/engine`;
  const socket = new WebSocket(wsUrl);
  const vm = new ConsoleViewModel({ sendLine: (line) => socket.send(line + "\n") });

  socket.onopen = () => {
    vm.connected();
    vm.hello("controller");
  };
  socket.onmessage = (ev) => vm.ingestChunk(String(ev.data), nowS());
  socket.onclose = () => vm.disconnected();

  const triggerBtn = el<HTMLButtonElement>("trigger");
  const behaviorSel = el<HTMLSelectElement>("behavior");
  const stoneInput = el<HTMLInputElement>("stone-length");
  const applyBtn = el<HTMLButtonElement>("apply-behavior");
  const statusLine = el<HTMLDivElement>("status");
  const ackLine = el<HTMLDivElement>("ack");
  const staleBadge = el<HTMLDivElement>("stale");

  for (const name of BEHAVIORS) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name.replace("_", " ");
    behaviorSel.appendChild(opt);
  }

  triggerBtn.onclick = () => {
    try {
      vm.sendTrigger();
    } catch (err) {
      ackLine.textContent = String(err);
    }
  };
  applyBtn.onclick = () => {
    const name = behaviorSel.value;
    const choice =
      name === "stepping_stones"
        ? { name, stoneLength: Number(stoneInput.value) }
        : { name };
    try {
      vm.sendBehavior(choice);
    } catch (err) {
      ackLine.textContent = String(err);
    }
  };

  function render(): void {
    const s = vm.state;
    staleBadge.style.display = vm.isStale(nowS()) ? "inline-block" : "none";
    triggerBtn.disabled = !vm.triggerArmed();

    if (vm.lastError) {
      ackLine.textContent = `server error: ${vm.lastError.message}`;
    } else if (vm.lastTriggerAck) {
      ackLine.textContent = vm.lastTriggerAck.accepted
        ? `trigger #${vm.lastTriggerAck.seq} accepted`
        : `trigger #${vm.lastTriggerAck.seq} rejected (outside window)`;
      triggerBtn.classList.toggle("denied", !vm.lastTriggerAck.accepted);
    }

    if (s && vm.geometry) {
      const countdown = vm.windowCountdown();
      statusLine.textContent =
        `${vm.status} | role ${vm.role ?? "-"} | ${s.behavior} | ${s.phase}` +
        ` | step ${s.step_count}` +
        (countdown !== null && countdown > 0
          ? ` | window in ${countdown.toFixed(2)} s`
          : vm.triggerArmed()
            ? " | window OPEN"
            : "");

      ctx.clearRect(0, 0, canvas.width, canvas.height);
      const cam: Camera = {
        width: canvas.width,
        height: canvas.height,
        metersToPixels: 220,
        centerX: s.hip_x,
        groundY: canvas.height - 60 + Math.min(0, s.hip_z - 1.0) * 0,
      };
      // Keep the figure on screen while climbing or descending stairs.
      const soleMid = (s.left_foot_z + s.right_foot_z) / 2 - vm.geometry.ankle_height;
      cam.groundY = canvas.height - 60 + soleMid * cam.metersToPixels;
      const figure = computeFigure(s, vm.geometry);
      const terrain = computeTerrain(s, vm.geometry);
      drawScene(ctx, figure, terrain, cam, { swingSide: s.swing_side });
    } else {
      statusLine.textContent = vm.status;
    }
    requestAnimationFrame(render);
  }
  requestAnimationFrame(render);
}

startApp();
