import init, { decay_curves, field_components, markov_phases, parse_phase } from "./pkg/giant_atom_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#333"];

function plot(canvas, t, series, yLabel) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap(s => s.y);
  const yMax = Math.max(1e-12, ...all) * 1.05;
  const tMax = t[t.length - 1] || 1;
  const X = v => pad + (w - 2 * pad) * v / tMax;
  const Y = v => h - pad - (h - 2 * pad) * v / yMax;
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, pad); ctx.lineTo(pad, h - pad); ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
  ctx.fillStyle = "#333";
  ctx.fillText("0", pad - 12, h - pad + 4);
  ctx.fillText(yMax.toPrecision(3), 2, pad + 4);
  ctx.fillText(`Jt = ${tMax}`, w - pad - 40, h - pad + 16);
  ctx.fillText(yLabel, pad + 4, pad - 8);
  series.forEach((s, k) => {
    ctx.strokeStyle = s.color || COLORS[k % COLORS.length];
    ctx.setLineDash(s.dash ? [6, 4] : []);
    ctx.beginPath();
    s.y.forEach((v, i) => (i ? ctx.lineTo(X(t[i]), Y(v)) : ctx.moveTo(X(t[i]), Y(v))));
    ctx.stroke();
  });
  ctx.setLineDash([]);
}

function legend(el, series) {
  el.innerHTML = series
    .map((s, k) => `<span style="color:${s.color || COLORS[k % COLORS.length]}">&#9644; ${s.name}</span>`)
    .join("");
}

function inputs() {
  return {
    d: Number(document.getElementById("d").value),
    phic: parse_phase(document.getElementById("phic").value.trim()),
    g: Number(document.getElementById("g").value),
    tmax: Number(document.getElementById("tmax").value),
  };
}

function guarded(infoId, fn) {
  const info = document.getElementById(infoId);
  try {
    info.className = "";
    fn(info);
  } catch (e) {
    info.className = "err";
    info.textContent = String(e.message || e);
  }
}

function runDecay() {
  guarded("decay-info", info => {
    const { d, phic, g, tmax } = inputs();
    const r = JSON.parse(decay_curves(d, phic, g, tmax));
    const series = [
      { name: "delay equation", y: r.dde },
      { name: "exp(-Γt)", y: r.markov, dash: true, color: "#333" },
    ];
    if (r.lattice) series.splice(1, 0, { name: `lattice (N = ${r.sites})`, y: r.lattice });
    plot(document.getElementById("decay"), r.t, series, "|ε|²");
    legend(document.getElementById("decay-legend"), series);
    const bic = (1 / (1 + r.gamma * r.t_d / 2)) ** 2;
    info.textContent = `Γ = ${r.gamma.toFixed(4)} J, t_d = ${r.t_d} / J; a bound state would hold |ε|² = ${bic.toFixed(5)}.`
      + (r.lattice ? "" : " Lattice skipped for J t_max > 200.");
  });
}

function runField() {
  guarded("field-info", info => {
    const { d, phic, tmax } = inputs();
    const r = JSON.parse(field_components(d, phic, tmax));
    const series = [
      { name: "|c₁ backward|", y: r.c1_b },
      { name: "|c₁ forward|", y: r.c1_f },
      { name: "|c₂ backward|", y: r.c2_b },
      { name: "|c₂ forward|", y: r.c2_f },
    ];
    plot(document.getElementById("field"), r.t, series, "|c|");
    legend(document.getElementById("field-legend"), series);
    info.textContent = `Channel weights at quarter-wave spacing: right ${r.right_weight.toFixed(4)}, left ${r.left_weight.toFixed(4)}.`;
  });
}

function runMarkov() {
  guarded("markov-out", out => {
    const r = JSON.parse(markov_phases(Number(document.getElementById("legs").value)));
    out.innerHTML = `φ = (<code>${r.text.join("</code>, <code>")}</code>), max residual ${r.max_residual.toExponential(2)}`;
  });
}

await init();
document.getElementById("run-decay").onclick = runDecay;
document.getElementById("run-field").onclick = runField;
document.getElementById("run-markov").onclick = runMarkov;
runDecay();
runField();
runMarkov();
