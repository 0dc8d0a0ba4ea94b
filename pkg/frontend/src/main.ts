import { ControlPanel } from "./controls.js";
import { DragController } from "./drag.js";
import { ConsoleFeed } from "./net.js";
import { TwinScene } from "./scene.js";
import { ConsoleStore } from "./state.js";

const ARM_LENGTH = 0.6; // demonstrator tip arc length
const SESSION_RATE_HZ = 100;

function start(): void {
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const panel = document.getElementById("panel") as HTMLElement;

  const store = new ConsoleStore();
  const scene = new TwinScene(canvas);

  const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
  const feed = new ConsoleFeed(wsUrl, {
    onMessage: (msg) => store.applyServerMessage(msg),
    onStatus: (open) => {
      store.setConnection(open ? "open" : "closed");
      drag.setConnected(open);
    },
  });

  const controls = new ControlPanel(panel, (msg) => feed.send(msg));
  const drag = new DragController((msg) => feed.send(msg), {
    tipArc: ARM_LENGTH,
    rateHz: SESSION_RATE_HZ,
  });

  store.onChange((state) => controls.render(state));

  // pointer -> world-projected drag in the view basis:
  // screen right = +x force, screen up = +z force (view is z-up)
  let startX = 0;
  let startY = 0;
  canvas.addEventListener("pointerdown", (event) => {
    if (drag.begin()) {
      startX = event.clientX;
      startY = event.clientY;
      canvas.setPointerCapture(event.pointerId);
    }
  });
  canvas.addEventListener("pointermove", (event) => {
    const wpp = scene.worldPerPixel();
    const dx = (event.clientX - startX) * wpp;
    const dz = -(event.clientY - startY) * wpp;
    drag.move(dx, 0, dz);
  });
  const release = () => drag.end();
  canvas.addEventListener("pointerup", release);
  canvas.addEventListener("pointercancel", release);

  const frame = () => {
    scene.render(store.current.latest);
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

start();
