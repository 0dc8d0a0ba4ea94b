// Console state store: latest-wins state messages, stale sequences dropped.

import type { ServerMessage, StateMessage } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface ConsoleState {
  connection: ConnectionStatus;
  latest: StateMessage | null;
  lastError: string | null;
  staleDropped: number;
}

type Listener = (state: ConsoleState) => void;

export class ConsoleStore {
  private state: ConsoleState = {
    connection: "connecting",
    latest: null,
    lastError: null,
    staleDropped: 0,
  };
  private listeners: Listener[] = [];

  get current(): ConsoleState {
    return this.state;
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  applyServerMessage(msg: ServerMessage): void {
    if (msg.type === "error") {
      this.state = { ...this.state, lastError: msg.message };
      this.emit();
      return;
    }
    const latest = this.state.latest;
    if (latest !== null && msg.seq <= latest.seq) {
      // stale or duplicate: the renderer only ever sees the newest state
      this.state = { ...this.state, staleDropped: this.state.staleDropped + 1 };
      return;
    }
    this.state = { ...this.state, latest: msg };
    this.emit();
  }

  setConnection(status: ConnectionStatus): void {
    const latest = status === "open" ? this.state.latest : this.state.latest;
    this.state = {
      ...this.state,
      connection: status,
      // a fresh connection starts a new sequence domain
      latest: status === "open" ? null : latest,
    };
    this.emit();
  }

  clearError(): void {
    if (this.state.lastError !== null) {
      this.state = { ...this.state, lastError: null };
      this.emit();
    }
  }
}
