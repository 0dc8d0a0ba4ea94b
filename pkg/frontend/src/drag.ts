// Pointer drag -> tip load messages.
//
// The drag displacement (already projected into world meters by the caller)
// times a force gain becomes a load at the arm tip.  Messages are throttled
// to the session rate; releasing the pointer always sends a zero load, and
// after a connection drop a zero load goes out before any new drag.

import { loadMessage, type LoadMessage } from "./protocol.js";

export interface DragOptions {
  /** N per meter of world-projected drag. */
  gain?: number;
  /** Arc-length of the application point (the arm tip). */
  tipArc: number;
  /** Maximum message rate (the session rate). */
  rateHz?: number;
  /** Injectable clock, seconds. */
  now?: () => number;
}

export class DragController {
  readonly gain: number;
  readonly tipArc: number;
  private readonly minInterval: number;
  private readonly now: () => number;
  private readonly send: (msg: LoadMessage) => void;

  private connected = false;
  private dragging = false;
  private lastSent = -Infinity;
  private needsReset = false;
  sent = 0;

  constructor(send: (msg: LoadMessage) => void, opts: DragOptions) {
    this.send = send;
    this.gain = opts.gain ?? 50.0;
    this.tipArc = opts.tipArc;
    this.minInterval = 1.0 / (opts.rateHz ?? 100.0);
    this.now = opts.now ?? (() => performance.now() / 1000);
  }

  setConnected(connected: boolean): void {
    if (connected && !this.connected && this.needsReset) {
      // invariant: a drop mid-drag yields a zero load on reconnect
      this.emit(0, 0, 0, true);
      this.needsReset = false;
    }
    this.connected = connected;
    if (!connected) {
      if (this.dragging) this.needsReset = true;
      this.dragging = false;
    }
  }

  get enabled(): boolean {
    return this.connected;
  }

  begin(): boolean {
    if (!this.connected) return false;
    this.dragging = true;
    return true;
  }

  /** Drag displacement since begin(), in world meters (view basis). */
  move(dx: number, dy: number, dz: number): void {
    if (!this.dragging || !this.connected) return;
    const t = this.now();
    if (t - this.lastSent < this.minInterval) return;
    this.emit(this.gain * dx, this.gain * dy, this.gain * dz);
    this.lastSent = t;
  }

  end(): void {
    if (!this.dragging) return;
    this.dragging = false;
    if (this.connected) this.emit(0, 0, 0, true);
  }

  private emit(fx: number, fy: number, fz: number, unthrottled = false): void {
    this.send(loadMessage(this.tipArc, fx, fy, fz));
    this.sent += 1;
    if (unthrottled) this.lastSent = -Infinity;
  }
}
