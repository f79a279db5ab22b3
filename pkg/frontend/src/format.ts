/** Probabilities render at three decimals; the full value stays available on hover. */
export function prob3(value: number): string {
  return value.toFixed(3);
}

export function bits3(value: number): string {
  return `${value.toFixed(3)} bits`;
}

/** Shortest string that round-trips the exact double, for title attributes. */
export function fullPrecision(value: number): string {
  return String(value);
}

export function poolLabel(group: number[], roster: string[]): string {
  return group.map((i) => roster[i] ?? `#${i}`).join(", ");
}

export function defaultRoster(n: number): string[] {
  return Array.from({ length: n }, (_, i) => `P${i}`);
}
