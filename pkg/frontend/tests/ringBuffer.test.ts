import { describe, expect, it } from "vitest";

import { RingBuffer } from "../src/ringBuffer.js";

describe("RingBuffer", () => {
  it("keeps insertion order below capacity", () => {
    const buf = new RingBuffer<number>(5);
    [1, 2, 3].forEach((n) => buf.push(n));
    expect(buf.toArray()).toEqual([1, 2, 3]);
    expect(buf.length).toBe(3);
    expect(buf.last()).toBe(3);
  });

  it("drops oldest entries beyond capacity", () => {
    const buf = new RingBuffer<number>(3);
    [1, 2, 3, 4, 5].forEach((n) => buf.push(n));
    expect(buf.toArray()).toEqual([3, 4, 5]);
    expect(buf.length).toBe(3);
  });

  it("clears", () => {
    const buf = new RingBuffer<number>(2);
    buf.push(1);
    buf.clear();
    expect(buf.length).toBe(0);
    expect(buf.last()).toBeUndefined();
  });

  it("rejects bad capacities", () => {
    expect(() => new RingBuffer(0)).toThrow(/capacity/);
    expect(() => new RingBuffer(1.5)).toThrow(/capacity/);
  });
});
