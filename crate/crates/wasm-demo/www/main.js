import init, { integrate, specialize, oracle_volume } from "./pkg/dpcalc_wasm_demo.js";

const $ = (id) => document.getElementById(id);

function show(out, f) {
  out.classList.remove("err");
  try {
    const r = f();
    out.textContent = r.startsWith("{") ? JSON.stringify(JSON.parse(r), null, 2) : r;
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e);
  }
}

await init();

$("lp-go").onclick = () => show($("lp-out"), () => integrate($("lp").value, Number($("lp-e").value)));
$("sp-go").onclick = () =>
  show($("sp-out"), () => specialize($("sp").value, Number($("sp-e").value), BigInt($("sp-p").value)));
$("or-go").onclick = () =>
  show($("or-out"), () =>
    oracle_volume($("or").value, BigInt($("or-p").value), Number($("or-n").value), $("or-eq").checked));
