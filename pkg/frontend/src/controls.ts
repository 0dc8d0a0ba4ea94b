// Preset controls and readouts.  Everything rendered here is acknowledged
// server state: button highlights and the scale label follow the state
// feed, never the click.

import { PROFILE_NAMES, profileMessage, scaleMessage, type ClientMessage } from "./protocol.js";
import type { ConsoleState } from "./state.js";

export class ControlPanel {
  private readonly buttons = new Map<string, HTMLButtonElement>();
  private readonly slider: HTMLInputElement;
  private readonly scaleLabel: HTMLElement;
  private readonly deviationLabel: HTMLElement;
  private readonly holdBadge: HTMLElement;
  private readonly connectionBadge: HTMLElement;
  private readonly toast: HTMLElement;
  private toastTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    root: HTMLElement,
    private readonly send: (msg: ClientMessage) => void,
  ) {
    const profiles = root.querySelector(".profiles") as HTMLElement;
    for (const name of PROFILE_NAMES) {
      const button = document.createElement("button");
      button.textContent = name;
      button.addEventListener("click", () => this.send(profileMessage(name)));
      profiles.appendChild(button);
      this.buttons.set(name, button);
    }
    this.slider = root.querySelector(".scale-slider") as HTMLInputElement;
    this.scaleLabel = root.querySelector(".scale-value") as HTMLElement;
    this.deviationLabel = root.querySelector(".deviation") as HTMLElement;
    this.holdBadge = root.querySelector(".hold") as HTMLElement;
    this.connectionBadge = root.querySelector(".connection") as HTMLElement;
    this.toast = root.querySelector(".toast") as HTMLElement;
    this.slider.addEventListener("change", () => {
      this.send(scaleMessage(parseFloat(this.slider.value)));
    });
  }

  render(state: ConsoleState): void {
    const latest = state.latest;
    for (const [name, button] of this.buttons) {
      button.classList.toggle("active", latest !== null && latest.profile === name);
      button.disabled = state.connection !== "open";
    }
    this.slider.disabled = state.connection !== "open";
    if (latest !== null) {
      this.scaleLabel.textContent = `1:${latest.scale.toFixed(3)}`;
      if (document.activeElement !== this.slider) {
        this.slider.value = latest.scale.toFixed(3);
      }
      const fmt = (v: number | null) => (v === null ? "–" : `${v.toFixed(1)}%`);
      this.deviationLabel.textContent =
        `deviation x ${fmt(latest.deviation.x)}  y ${fmt(latest.deviation.y)}  z ${fmt(latest.deviation.z)}`;
      this.holdBadge.textContent = latest.held ? "holding" : "moving";
      this.holdBadge.classList.toggle("held", latest.held);
    }
    this.connectionBadge.textContent = state.connection;
    this.connectionBadge.classList.toggle("open", state.connection === "open");
    if (state.lastError !== null) {
      this.showToast(state.lastError);
    }
  }

  private showToast(message: string): void {
    this.toast.textContent = message;
    this.toast.classList.add("visible");
    if (this.toastTimer !== null) clearTimeout(this.toastTimer);
    this.toastTimer = setTimeout(() => this.toast.classList.remove("visible"), 3000);
  }
}
