// Live sample stream: wraps an EventSource, surfaces connection status, and
// reconnects after drops until the server signals the terminal "end" event.

import { parseStreamEvent, StreamEvent } from "./types.js";

export type StreamStatus = "connecting" | "live" | "reconnecting" | "ended";

export interface StreamCallbacks {
  onEvent(event: StreamEvent): void;
  onStatus(status: StreamStatus): void;
}

export interface EventSourceLike {
  onopen: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  addEventListener(type: string, listener: (ev: { data: string }) => void): void;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

const defaultFactory: EventSourceFactory = (url) =>
  new EventSource(url) as unknown as EventSourceLike;

export class SampleStream {
  private source: EventSourceLike | null = null;
  private ended = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly callbacks: StreamCallbacks,
    private readonly makeSource: EventSourceFactory = defaultFactory,
    private readonly reconnectDelayMs = 1000,
  ) {}

  open(): void {
    this.callbacks.onStatus("connecting");
    this.connect();
  }

  private connect(): void {
    const source = this.makeSource(this.url);
    this.source = source;
    source.onopen = () => this.callbacks.onStatus("live");
    source.onmessage = (ev) => {
      const event = parseStreamEvent(ev.data);
      if (event !== null) this.callbacks.onEvent(event);
    };
    source.addEventListener("end", () => {
      this.ended = true;
      this.callbacks.onStatus("ended");
      this.close();
    });
    source.onerror = () => {
      if (this.ended) return;
      source.close();
      this.callbacks.onStatus("reconnecting");
      this.reconnectTimer = setTimeout(() => this.connect(), this.reconnectDelayMs);
    };
  }

  close(): void {
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    this.source?.close();
    this.source = null;
  }
}
