// Minimal dependency-free SVG line charts (daily resolution only).

export interface Series {
  label: string;
  points: Array<[number, number]>;
  cssClass: string;
}

export interface ChartOptions {
  width?: number;
  height?: number;
  /** x value to mark with a vertical rule (e.g. the cost-curve breakpoint). */
  markX?: number;
}

const MARGIN = { top: 12, right: 16, bottom: 28, left: 56 };
const SVG_NS = "http://www.w3.org/2000/svg";

function extent(values: number[]): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  return [lo, hi];
}

export function renderLineChart(
  container: HTMLElement,
  series: Series[],
  options: ChartOptions = {},
): SVGSVGElement {
  const width = options.width ?? 640;
  const height = options.height ?? 260;
  const innerW = width - MARGIN.left - MARGIN.right;
  const innerH = height - MARGIN.top - MARGIN.bottom;

  const xs = series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = series.flatMap((s) => s.points.map((p) => p[1]));
  const [x0, x1] = extent(xs);
  const [y0, y1] = extent(ys);
  const sx = (x: number) => MARGIN.left + ((x - x0) / (x1 - x0)) * innerW;
  const sy = (y: number) => MARGIN.top + (1 - (y - y0) / (y1 - y0)) * innerH;

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("role", "img");
  svg.classList.add("chart");

  const axes = document.createElementNS(SVG_NS, "path");
  axes.setAttribute(
    "d",
    `M ${MARGIN.left} ${MARGIN.top} V ${MARGIN.top + innerH} H ${MARGIN.left + innerW}`,
  );
  axes.classList.add("chart-axes");
  svg.appendChild(axes);

  for (const s of series) {
    const path = document.createElementNS(SVG_NS, "path");
    const d = s.points
      .map(([x, y], i) => `${i === 0 ? "M" : "L"} ${sx(x)} ${sy(y)}`)
      .join(" ");
    path.setAttribute("d", d);
    path.classList.add("chart-line", s.cssClass);
    path.dataset.label = s.label;
    svg.appendChild(path);
  }

  if (options.markX !== undefined && options.markX >= x0 && options.markX <= x1) {
    const rule = document.createElementNS(SVG_NS, "line");
    rule.setAttribute("x1", String(sx(options.markX)));
    rule.setAttribute("x2", String(sx(options.markX)));
    rule.setAttribute("y1", String(MARGIN.top));
    rule.setAttribute("y2", String(MARGIN.top + innerH));
    rule.classList.add("chart-mark");
    svg.appendChild(rule);
  }

  const yLabel = (v: number, anchor: number) => {
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(MARGIN.left - 6));
    text.setAttribute("y", String(anchor));
    text.setAttribute("text-anchor", "end");
    text.classList.add("chart-tick");
    text.textContent = v.toLocaleString();
    return text;
  };
  svg.appendChild(yLabel(y1, MARGIN.top + 4));
  svg.appendChild(yLabel(y0, MARGIN.top + innerH));

  const xLabel = (v: number, anchor: number, align: string) => {
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(anchor));
    text.setAttribute("y", String(MARGIN.top + innerH + 18));
    text.setAttribute("text-anchor", align);
    text.classList.add("chart-tick");
    text.textContent = v.toLocaleString();
    return text;
  };
  svg.appendChild(xLabel(x0, MARGIN.left, "start"));
  svg.appendChild(xLabel(x1, MARGIN.left + innerW, "end"));

  container.appendChild(svg);
  return svg;
}
