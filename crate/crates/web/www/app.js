import init, { iqr_filter_view, lstm_cell_gates, planted_ranking } from "./pkg/opseq_web.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => Number(x).toFixed(4);

function guard(fn) {
  return () => {
    try {
      $("err").textContent = "";
      fn();
    } catch (e) {
      $("err").textContent = String(e.message ?? e);
    }
  };
}

function numbers(text) {
  return text.split(/[\s,]+/).filter((s) => s.length).map(Number);
}

const renderIqr = guard(() => {
  const values = numbers($("lengths").value);
  const k = Number($("mult").value);
  $("mult-v").textContent = k.toFixed(1);
  const view = iqr_filter_view(new Float64Array(values), k);
  const kept = view.kept();
  const max = Math.max(...values);
  let rows = "";
  values.forEach((v, i) => {
    const w = Math.max(1, (300 * v) / max);
    const cls = kept[i] ? "bar" : "bar dropped";
    rows += `<tr><td>${v}</td><td style="text-align:left"><span class="${cls}" style="width:${w}px"></span></td></tr>`;
  });
  $("iqr-out").innerHTML =
    `<p>Q1 ${fmt(view.q1)} &nbsp; Q2 ${fmt(view.q2)} &nbsp; Q3 ${fmt(view.q3)} &nbsp; IQR ${fmt(view.iqr)} &nbsp; ` +
    `threshold <b>${fmt(view.threshold)}</b> &nbsp; kept ${kept.reduce((a, b) => a + b, 0)} of ${values.length}</p>` +
    `<table>${rows}</table>`;
  view.free();
});

const cellInputs = [
  ["x", 1.0], ["h_prev", 0.0], ["c_prev", 0.0],
  ["w_i", 0.5], ["w_f", 0.5], ["w_g", 1.0], ["w_o", 0.5],
  ["u_i", 0.0], ["u_f", 0.0], ["u_g", 0.0], ["u_o", 0.0],
  ["b_i", 0.0], ["b_f", 1.0], ["b_g", 0.0], ["b_o", 0.0],
];

function buildCellControls() {
  $("cell-controls").innerHTML = cellInputs
    .map(([name, v]) =>
      `<p><label for="c-${name}">${name}</label><input id="c-${name}" type="range" min="-3" max="3" step="0.05" value="${v}"> <span id="c-${name}-v"></span></p>`)
    .join("");
  for (const [name] of cellInputs) $(`c-${name}`).addEventListener("input", renderCell);
}

const renderCell = guard(() => {
  const val = {};
  for (const [name] of cellInputs) {
    val[name] = Number($(`c-${name}`).value);
    $(`c-${name}-v`).textContent = val[name].toFixed(2);
  }
  const row = (p) => new Float64Array(["i", "f", "g", "o"].map((g) => val[`${p}_${g}`]));
  const out = lstm_cell_gates(val.x, val.h_prev, val.c_prev, row("w"), row("u"), row("b"));
  const names = ["input gate i", "forget gate f", "candidate g", "output gate o", "cell c", "hidden h"];
  $("cell-out").innerHTML = names
    .map((n, k) => {
      const w = Math.round(Math.abs(out[k]) * 120);
      return `<tr><td>${n}</td><td>${fmt(out[k])}</td><td style="text-align:left"><span class="bar" style="width:${w}px"></span></td></tr>`;
    })
    .join("");
});

const renderRank = guard(() => {
  $("levels-v").textContent = $("levels").value;
  $("noise-v").textContent = Number($("noise").value).toFixed(2);
  const effects = new Float64Array(numbers($("effects").value));
  const r = planted_ranking(effects, Number($("levels").value), Number($("noise").value), BigInt($("seed").value || 0));
  const factors = r.factors(), levels = r.levels(), scores = r.scores(), truth = r.truth();
  let rows = "<tr><th>step</th><th>factor=level</th><th>score</th><th>planted</th></tr>";
  factors.forEach((f, k) => {
    rows += `<tr><td>${k + 1}</td><td>${f}=${levels[k]}</td><td>${fmt(scores[k])}</td><td>${truth[k]}</td></tr>`;
  });
  const verdict = r.recovered ? `<span class="ok">planted order recovered</span>` : `<span class="bad">ranking differs from planted order</span>`;
  $("rank-out").innerHTML = `<table>${rows}</table><p>${verdict}</p>`;
  r.free();
});

await init();
$("lengths").addEventListener("input", renderIqr);
$("mult").addEventListener("input", renderIqr);
buildCellControls();
for (const id of ["effects", "levels", "noise", "seed"]) $(id).addEventListener("input", renderRank);
renderIqr();
renderCell();
renderRank();
