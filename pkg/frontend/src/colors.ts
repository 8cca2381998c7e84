/** Sequential-luminance cell tinting. */

export type ColorScale = "amber" | "blue" | "gray";

const HUES: Record<ColorScale, [number, number, number]> = {
  amber: [255, 160, 20],
  blue: [40, 110, 235],
  gray: [90, 90, 90],
};

/**
 * Map an intensity in [0, 1] to a background color whose luminance falls
 * monotonically with intensity. Intensity 0 stays white so untinted cells
 * read as "no confidence"; exact scores remain available on hover.
 */
export function cellBackground(intensity: number, scale: ColorScale = "amber"): string {
  const clamped = Math.max(0, Math.min(1, intensity));
  const [r, g, b] = HUES[scale];
  const alpha = Math.round(clamped * 100) / 100;
  return alpha === 0 ? "transparent" : `rgba(${r}, ${g}, ${b}, ${alpha})`;
}

/** Dark text stays readable until the tint gets deep. */
export function cellForeground(intensity: number): string {
  return intensity > 0.75 ? "#ffffff" : "#1c1c1c";
}
