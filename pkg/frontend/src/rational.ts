/** Exact "p/q" rational strings, mirroring the server's wire format.
 *
 * The server is the validator; the client only parses, formats, compares
 * and quantizes user input. All arithmetic is bigint, never float, except
 * for the explicit decimal rendering toggle.
 */

export interface Rational {
  readonly num: bigint;
  readonly den: bigint; // always > 0, gcd(num, den) = 1
}

function gcd(a: bigint, b: bigint): bigint {
  a = a < 0n ? -a : a;
  b = b < 0n ? -b : b;
  while (b) {
    [a, b] = [b, a % b];
  }
  return a;
}

export function rat(num: bigint, den: bigint = 1n): Rational {
  if (den === 0n) throw new Error("zero denominator");
  if (den < 0n) {
    num = -num;
    den = -den;
  }
  const g = gcd(num, den) || 1n;
  return { num: num / g, den: den / g };
}

const RATIONAL_RE = /^[+-]?\d+(\/\d+)?$/;
const DECIMAL_RE = /^[+-]?(\d+)\.(\d+)$/;

/** Parse "p/q", an integer string, or a decimal literal, exactly. */
export function parseRational(text: string): Rational {
  const trimmed = text.trim();
  if (RATIONAL_RE.test(trimmed)) {
    const [p, q] = trimmed.split("/");
    return rat(BigInt(p!), q === undefined ? 1n : BigInt(q));
  }
  const dec = DECIMAL_RE.exec(trimmed);
  if (dec) {
    const sign = trimmed.startsWith("-") ? -1n : 1n;
    const whole = BigInt(dec[1]!);
    const frac = BigInt(dec[2]!);
    const scale = 10n ** BigInt(dec[2]!.length);
    return rat(sign * (whole * scale + frac), scale);
  }
  throw new Error(`not a rational: ${text}`);
}

export function formatRational(r: Rational): string {
  return r.den === 1n ? r.num.toString() : `${r.num}/${r.den}`;
}

export function toDecimal(r: Rational, digits = 6): string {
  return (Number(r.num) / Number(r.den)).toPrecision(digits).replace(/\.?0+$/, "");
}

export function compare(a: Rational, b: Rational): number {
  const left = a.num * b.den;
  const right = b.num * a.den;
  return left === right ? 0 : left < right ? -1 : 1;
}

export function inUnitInterval(r: Rational): boolean {
  return r.num >= 0n && r.num <= r.den;
}

/**
 * Best rational approximation with denominator at most `maxDen`
 * (Stern-Brocot walk). Used by the metric function editor, which quantizes
 * slider input to denominators <= 1000 before submission.
 */
export function limitDenominator(r: Rational, maxDen: bigint = 1000n): Rational {
  if (r.den <= maxDen) return r;
  let [p0, q0, p1, q1] = [0n, 1n, 1n, 0n];
  let [n, d] = [r.num, r.den];
  let negative = false;
  if (n < 0n) {
    negative = true;
    n = -n;
  }
  while (true) {
    const a = n / d;
    const q2 = q0 + a * q1;
    if (q2 > maxDen) break;
    [p0, q0, p1, q1] = [p1, q1, p0 + a * p1, q2];
    [n, d] = [d, n - a * d];
    if (d === 0n) break;
  }
  const k = (maxDen - q0) / q1;
  const bound1 = rat(p0 + k * p1, q0 + k * q1);
  const bound2 = rat(p1, q1);
  const target = rat(negative ? -r.num : r.num, r.den);
  const chosen =
    compare(absDiff(bound2, target), absDiff(bound1, target)) <= 0 ? bound2 : bound1;
  return negative ? rat(-chosen.num, chosen.den) : chosen;
}

function absDiff(a: Rational, b: Rational): Rational {
  const num = a.num * b.den - b.num * a.den;
  return rat(num < 0n ? -num : num, a.den * b.den);
}
