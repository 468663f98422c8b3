import { mountApp } from "./app";

const params = new URLSearchParams(window.location.search);
const serviceUrl = params.get("service") ?? "http://127.0.0.1:8400";
mountApp(document.getElementById("app")!, serviceUrl);
