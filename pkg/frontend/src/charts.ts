import { FeedResponse } from "./types.js";

export interface ChartPoint {
  /** epoch milliseconds parsed from created_at */
  t: number;
  value: number;
}

/**
 * A bounded window of points for one channel field, kept sorted by time.
 * Feed values may arrive as numbers or numeric strings; anything that does
 * not coerce cleanly (null, absent, junk) is skipped.
 */
export class ChartSeries {
  readonly points: ChartPoint[] = [];

  constructor(
    readonly channelId: number,
    readonly fieldIndex: number,
    readonly label: string,
    readonly capacity = 100,
  ) {
    if (capacity < 1) throw new RangeError("capacity must be positive");
  }

  static fromFeed(feed: FeedResponse, fieldIndex: number, capacity = 100): ChartSeries {
    const key = `field${fieldIndex}`;
    const label = typeof feed.channel[key] === "string" ? (feed.channel[key] as string) : key;
    const series = new ChartSeries(feed.channel.id, fieldIndex, label, capacity);
    for (const entry of feed.feeds) {
      const t = Date.parse(entry.created_at);
      const value = Number(entry[key]);
      if (Number.isNaN(t) || entry[key] === null || entry[key] === undefined || Number.isNaN(value)) {
        continue;
      }
      series.push({ t, value });
    }
    return series;
  }

  push(point: ChartPoint): void {
    // feeds come oldest-first, so appending is the common case
    let i = this.points.length;
    while (i > 0 && this.points[i - 1]!.t > point.t) i -= 1;
    this.points.splice(i, 0, point);
    if (this.points.length > this.capacity) this.points.shift();
  }

  /** Replace contents from a fresh feed fetch. */
  reset(points: ChartPoint[]): void {
    this.points.length = 0;
    for (const p of [...points].sort((a, b) => a.t - b.t).slice(-this.capacity)) {
      this.points.push(p);
    }
  }

  range(): { min: number; max: number } {
    if (!this.points.length) return { min: 0, max: 1 };
    let min = Infinity;
    let max = -Infinity;
    for (const p of this.points) {
      if (p.value < min) min = p.value;
      if (p.value > max) max = p.value;
    }
    if (min === max) {
      min -= 1;
      max += 1;
    }
    return { min, max };
  }
}
