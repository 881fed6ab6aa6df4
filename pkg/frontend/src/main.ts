// Wires the console together: WebSocket to the bridge, keyboard/slider
// input, and the render loop over gauge, force bars and strip charts.

import {
  abortTrial,
  Command,
  decodeFrame,
  encodeCommand,
  setMode,
  startMaxForce,
  startModulation,
} from "./codec.js";
import { drawStripChart } from "./charts.js";
import { drawForceBars, forceView } from "./forcebar.js";
import { drawGauge, gaugeView } from "./gauge.js";
import { WristInput } from "./input.js";
import { parseTrialCsv, ReplayPlayer } from "./replay.js";
import { ConsoleViewModel } from "./viewmodel.js";

const params = new URLSearchParams(window.location.search);
const port = params.get("port") ?? "7420";
const url = `ws://${window.location.hostname || "127.0.0.1"}:${port}`;

const vm = new ConsoleViewModel();
let socket: WebSocket | null = null;

const sink = {
  send(cmd: Command): void {
    if (socket !== null && socket.readyState === WebSocket.OPEN) {
      socket.send(encodeCommand(cmd));
    }
  },
};
const input = new WristInput(sink, { rateLimitDegPerSec: 60, sendHz: 30 });
let replayPlayer: ReplayPlayer | null = null;
let inputMode: "keys" | "slider" | "replay" = "keys";

function stopReplay(): void {
  replayPlayer?.stop();
  replayPlayer = null;
}

function connect(): void {
  socket = new WebSocket(url);
  socket.onopen = () => vm.socketOpened();
  socket.onclose = () => {
    vm.socketClosed();
    setTimeout(connect, 1000);
  };
  socket.onmessage = (event) => {
    try {
      vm.ingest(decodeFrame(String(event.data)), performance.now());
    } catch {
      // tolerate unknown frames from newer bridges
    }
  };
}
connect();

const canvas = (id: string) => document.getElementById(id) as HTMLCanvasElement;
const gaugeCanvas = canvas("gauge");
const forceCanvas = canvas("force");
const angleChartCanvas = canvas("angle-chart");
const forceChartCanvas = canvas("force-chart");
const statusBadge = document.getElementById("status") as HTMLSpanElement;
const modeBadge = document.getElementById("mode") as HTMLSpanElement;
const slider = document.getElementById("slider") as HTMLInputElement;

document.addEventListener("keydown", (e) => {
  if (e.repeat) return;
  if (e.key === "ArrowRight" || e.key === "ArrowUp") input.keyDown("extend");
  else if (e.key === "ArrowLeft" || e.key === "ArrowDown") input.keyDown("flex");
  else return;
  stopReplay();
  inputMode = "keys";
});
document.addEventListener("keyup", (e) => {
  if (e.key === "ArrowRight" || e.key === "ArrowUp") input.keyUp("extend");
  if (e.key === "ArrowLeft" || e.key === "ArrowDown") input.keyUp("flex");
});
slider.addEventListener("input", () => {
  stopReplay();
  inputMode = "slider";
  input.setSlider(Number(slider.value));
});

const replayFile = document.getElementById("replay-file") as HTMLInputElement;
replayFile.addEventListener("change", async () => {
  const file = replayFile.files?.[0];
  if (!file) return;
  try {
    const samples = parseTrialCsv(await file.text());
    stopReplay();
    replayPlayer = new ReplayPlayer(sink, samples, { sendHz: 30 });
    replayPlayer.start(performance.now());
    inputMode = "replay";
  } catch (err) {
    console.error("replay load failed:", err);
  } finally {
    replayFile.value = "";
  }
});

for (const pct of [20, 50, 80]) {
  document.getElementById(`trial-${pct}`)!.addEventListener("click", () => {
    sink.send(startModulation(pct));
  });
}
document.getElementById("trial-max")!.addEventListener("click", () => {
  sink.send(startMaxForce());
});
document.getElementById("trial-abort")!.addEventListener("click", () => {
  sink.send(abortTrial());
});
(document.getElementById("mode-select") as HTMLSelectElement).addEventListener(
  "change",
  (e) => sink.send(setMode((e.target as HTMLSelectElement).value)),
);

function render(nowMs: number): void {
  if (replayPlayer !== null) {
    replayPlayer.tick(nowMs);
    if (!replayPlayer.active) {
      stopReplay();
      inputMode = "keys";
    }
  } else {
    input.tick(nowMs);
  }
  const status = vm.status(nowMs);
  statusBadge.textContent = status;
  statusBadge.className = `badge ${status}`;
  const frame = vm.latest;
  modeBadge.textContent = frame?.mode ?? "--";
  (document.getElementById("input-mode") as HTMLSpanElement).textContent = inputMode;

  const stale = status !== "connected";
  drawGauge(
    gaugeCanvas.getContext("2d")!,
    gaugeView(frame, stale),
    gaugeCanvas.width,
    gaugeCanvas.height,
  );
  drawForceBars(
    forceCanvas.getContext("2d")!,
    forceView(frame),
    forceCanvas.width,
    forceCanvas.height,
  );
  drawStripChart(
    angleChartCanvas.getContext("2d")!,
    vm.angleChart,
    { color: "#6ab0f3", yMin: -60, yMax: 60, label: "wrist angle (deg)", guides: [-15, 0, 15] },
    angleChartCanvas.width,
    angleChartCanvas.height,
  );
  drawStripChart(
    forceChartCanvas.getContext("2d")!,
    vm.forceChart,
    { color: "#7bd88f", yMin: 0, yMax: 20, label: "measured force (N)", guides: [0, 5, 10, 15] },
    forceChartCanvas.width,
    forceChartCanvas.height,
  );
  requestAnimationFrame(render);
}
requestAnimationFrame(render);
