import init, { field_view, kernel_curve, zero_density } from "./pkg/rrw_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// Diverging map: blue for negative, red for positive.
function color(v, scale) {
  const t = Math.max(-1, Math.min(1, v / scale));
  const a = Math.round(255 * (1 - Math.abs(t)));
  return t < 0 ? [a, a, 255] : [255, a, a];
}

function drawField() {
  const view = field_view(num("f-n"), num("f-seed"), num("f-grid"));
  const canvas = $("f-canvas");
  const ctx = canvas.getContext("2d");
  const n = view.grid;
  const values = view.values();
  const scale = 2.5;
  const img = ctx.createImageData(n, n);
  for (let j = 0; j < n; j++) {
    for (let i = 0; i < n; i++) {
      // Flip rows so y points up.
      const [r, g, b] = color(values[j * n + i], scale);
      const k = 4 * ((n - 1 - j) * n + i);
      img.data[k] = r; img.data[k + 1] = g; img.data[k + 2] = b; img.data[k + 3] = 255;
    }
  }
  const off = new OffscreenCanvas(n, n);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
  if ($("f-lines").checked) {
    const seg = view.segments();
    const w = canvas.width, h = canvas.height;
    ctx.strokeStyle = "#000";
    ctx.lineWidth = 1;
    ctx.beginPath();
    for (let k = 0; k < seg.length; k += 4) {
      ctx.moveTo(seg[k] * w, (1 - seg[k + 1]) * h);
      ctx.lineTo(seg[k + 2] * w, (1 - seg[k + 3]) * h);
    }
    ctx.stroke();
  }
  $("f-out").textContent =
    `modes K = ${view.modes}, nodal length = ${view.length.toFixed(3)}, ` +
    `length/λ = ${(view.length / view.lambda).toFixed(4)} (limit 0.25)`;
  view.free();
}

function drawKernel() {
  const rMax = num("k-r");
  const pts = 600;
  const ys = kernel_curve(num("k-d"), $("k-mono").checked, rMax, pts);
  const canvas = $("k-canvas");
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height;
  const y = (v) => h / 2 - v * (h / 2 - 8);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath(); ctx.moveTo(0, y(0)); ctx.lineTo(w, y(0)); ctx.stroke();
  ctx.strokeStyle = "#c33";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ys.forEach((v, i) => {
    const x = (i / (pts - 1)) * w;
    i === 0 ? ctx.moveTo(x, y(v)) : ctx.lineTo(x, y(v));
  });
  ctx.stroke();
}

function countZeros() {
  const d = zero_density(num("z-n"), num("z-draws"));
  const mean = d.reduce((a, b) => a + b, 0) / d.length;
  const target = 1 / (Math.PI * Math.sqrt(3));
  $("z-out").textContent =
    `mean zeros/λ = ${mean.toFixed(5)} over ${d.length} draws; ` +
    `1/(π√3) = ${target.toFixed(5)} (${(100 * (mean / target - 1)).toFixed(2)}%)`;
}

function guard(f) {
  return () => {
    try { f(); } catch (e) { alert(e); }
  };
}

await init();
$("f-go").addEventListener("click", guard(drawField));
$("k-go").addEventListener("click", guard(drawKernel));
$("z-go").addEventListener("click", guard(countZeros));
drawField();
drawKernel();
