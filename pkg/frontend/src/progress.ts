/** Loss-curve scaling for the progress panel's SVG polyline. */

export function lossPolyline(losses: number[], width: number, height: number): string {
  if (losses.length === 0) return "";
  const lo = Math.min(...losses);
  const hi = Math.max(...losses);
  const stepX = losses.length > 1 ? width / (losses.length - 1) : 0;
  return losses
    .map((v, i) => {
      const x = losses.length > 1 ? i * stepX : width / 2;
      const y = hi > lo ? height - ((v - lo) / (hi - lo)) * height : height / 2;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}
