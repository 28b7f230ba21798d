// WebSocket link to the gateway bridge with automatic reconnection.

import { BridgeMessage, UiMessage } from "./types";

export type BusStatus = "connecting" | "open" | "closed";

export class GatewayBus {
  url: string;
  status: BusStatus = "closed";
  onMessage: (msg: BridgeMessage) => void = () => {};
  onStatus: (status: BusStatus) => void = () => {};
  onError: (detail: string) => void = () => {};

  private ws: WebSocket | null = null;
  private backoffMs = 250;
  private closedByUser = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(url: string) {
    this.url = url;
  }

  connect(): void {
    this.closedByUser = false;
    this.open();
  }

  private open(): void {
    this.setStatus("connecting");
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.backoffMs = 250;
      this.setStatus("open");
    };
    ws.onmessage = (event: MessageEvent) => {
      let doc: BridgeMessage | { error?: string };
      try {
        doc = JSON.parse(event.data as string);
      } catch {
        return;
      }
      if ("error" in doc && doc.error) {
        this.onError(doc.error);
        return;
      }
      this.onMessage(doc as BridgeMessage);
    };
    ws.onclose = () => {
      this.ws = null;
      this.setStatus("closed");
      if (!this.closedByUser) {
        this.timer = setTimeout(() => this.open(), this.backoffMs);
        this.backoffMs = Math.min(this.backoffMs * 2, 5000);
      }
    };
    ws.onerror = () => {
      // onclose follows; the banner + backoff live there
    };
  }

  send(msg: UiMessage): boolean {
    if (this.ws === null || this.status !== "open") {
      return false;
    }
    this.ws.send(JSON.stringify(msg));
    return true;
  }

  close(): void {
    this.closedByUser = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.ws?.close();
  }

  private setStatus(status: BusStatus): void {
    this.status = status;
    this.onStatus(status);
  }
}
