// WebSocket client with automatic reconnection.

import { parseServerMessage, type ClientMessage, type ServerMessage } from "./protocol.js";

export interface FeedCallbacks {
  onMessage: (msg: ServerMessage) => void;
  onStatus: (open: boolean) => void;
}

export class ConsoleFeed {
  private socket: WebSocket | null = null;
  private closed = false;

  constructor(
    private readonly url: string,
    private readonly callbacks: FeedCallbacks,
    private readonly retryMs = 1000,
  ) {
    this.connect();
  }

  private connect(): void {
    const socket = new WebSocket(this.url);
    this.socket = socket;
    socket.addEventListener("open", () => this.callbacks.onStatus(true));
    socket.addEventListener("message", (event) => {
      const msg = parseServerMessage(String(event.data));
      if (msg !== null) this.callbacks.onMessage(msg);
    });
    socket.addEventListener("close", () => {
      this.callbacks.onStatus(false);
      if (!this.closed) {
        setTimeout(() => this.connect(), this.retryMs);
      }
    });
    socket.addEventListener("error", () => socket.close());
  }

  send(msg: ClientMessage): void {
    if (this.socket !== null && this.socket.readyState === WebSocket.OPEN) {
      this.socket.send(JSON.stringify(msg));
    }
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}
