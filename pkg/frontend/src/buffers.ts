// Rolling time-ordered buffers for the 60 s history window.

export class TimeSeries {
  times: number[] = [];
  values: number[] = [];

  constructor(private windowS: number) {}

  push(timeS: number, value: number): void {
    const n = this.times.length;
    if (n > 0 && timeS < this.times[n - 1]) {
      // history replay plus live stream can only move forward; drop strays
      return;
    }
    if (n > 0 && timeS === this.times[n - 1]) {
      this.values[n - 1] = value;
      return;
    }
    this.times.push(timeS);
    this.values.push(value);
    this.trim(timeS);
  }

  private trim(nowS: number): void {
    const cutoff = nowS - this.windowS;
    let drop = 0;
    while (drop < this.times.length && this.times[drop] < cutoff) drop++;
    if (drop > 0) {
      this.times.splice(0, drop);
      this.values.splice(0, drop);
    }
  }

  get length(): number {
    return this.times.length;
  }

  latest(): number | null {
    return this.values.length ? this.values[this.values.length - 1] : null;
  }

  clear(): void {
    this.times.length = 0;
    this.values.length = 0;
  }
}
