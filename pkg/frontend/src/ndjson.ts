/** Incremental NDJSON decoding for the event stream.
 *
 * Chunks arrive cut at arbitrary byte boundaries; a partial trailing line is
 * held back until its newline shows up. Lines that fail to parse are counted
 * and skipped rather than poisoning the stream: after a reconnect the client
 * resumes from the last applied seq, so a clipped line is never load-bearing.
 */
export class NdjsonBuffer {
  private tail = "";
  dropped = 0;

  /** Decode the complete lines in `chunk`, keeping any partial tail. */
  push(chunk: string): unknown[] {
    const text = this.tail + chunk;
    const lines = text.split("\n");
    this.tail = lines.pop() ?? "";
    return this.parseLines(lines);
  }

  /** Flush at end of stream; the tail is treated as a final line. */
  end(): unknown[] {
    const last = this.tail;
    this.tail = "";
    return this.parseLines([last]);
  }

  private parseLines(lines: string[]): unknown[] {
    const out: unknown[] = [];
    for (const line of lines) {
      const trimmed = line.trim();
      if (!trimmed) continue;
      try {
        out.push(JSON.parse(trimmed));
      } catch {
        this.dropped += 1;
      }
    }
    return out;
  }
}
