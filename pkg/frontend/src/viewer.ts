/** three.js viewer: renders mesh payloads with per-op coloring and
 * highlight of the ops edited by the latest turn. */

import * as THREE from "three";

import { MeshPayload } from "./api";

const OP_COLORS = [0x7aa2f7, 0x9ece6a, 0xe0af68, 0xbb9af7, 0x7dcfff, 0xf7768e];
const HIGHLIGHT = new THREE.Color(0xff8800);

export function meshToGeometry(payload: MeshPayload, highlighted: number[]): THREE.BufferGeometry {
  const geometry = new THREE.BufferGeometry();
  const triCount = payload.triangle_op.length;
  const positions = new Float32Array(triCount * 9);
  const colors = new Float32Array(triCount * 9);
  const highlightSet = new Set(highlighted);
  const color = new THREE.Color();
  for (let t = 0; t < triCount; t++) {
    const op = payload.triangle_op[t];
    if (highlightSet.has(op)) {
      color.copy(HIGHLIGHT);
    } else {
      color.setHex(OP_COLORS[op % OP_COLORS.length]);
    }
    for (let v = 0; v < 3; v++) {
      const vertexIndex = payload.triangles[t * 3 + v];
      for (let c = 0; c < 3; c++) {
        positions[t * 9 + v * 3 + c] = payload.vertices[vertexIndex * 3 + c];
      }
      colors[t * 9 + v * 3] = color.r;
      colors[t * 9 + v * 3 + 1] = color.g;
      colors[t * 9 + v * 3 + 2] = color.b;
    }
  }
  geometry.setAttribute("position", new THREE.BufferAttribute(positions, 3));
  geometry.setAttribute("color", new THREE.BufferAttribute(colors, 3));
  geometry.computeVertexNormals();
  return geometry;
}

export class Viewer {
  private renderer: THREE.WebGLRenderer;
  private scene: THREE.Scene;
  private camera: THREE.PerspectiveCamera;
  private mesh: THREE.Mesh | null = null;
  private frame = 0;

  constructor(container: HTMLElement) {
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setSize(container.clientWidth, container.clientHeight);
    container.appendChild(this.renderer.domElement);
    this.scene = new THREE.Scene();
    this.scene.background = new THREE.Color(0x1a1b26);
    this.camera = new THREE.PerspectiveCamera(
      45,
      container.clientWidth / container.clientHeight,
      0.01,
      100,
    );
    this.camera.position.set(3, -3, 2.2);
    this.camera.up.set(0, 0, 1);
    this.camera.lookAt(0.5, 0.5, 0.5);
    const key = new THREE.DirectionalLight(0xffffff, 1.6);
    key.position.set(4, -2, 5);
    this.scene.add(key);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.55));
    const animate = () => {
      this.frame = requestAnimationFrame(animate);
      if (this.mesh) this.mesh.rotation.z += 0.003;
      this.renderer.render(this.scene, this.camera);
    };
    animate();
  }

  show(payload: MeshPayload, highlighted: number[]) {
    if (this.mesh) {
      this.scene.remove(this.mesh);
      this.mesh.geometry.dispose();
    }
    if (payload.triangle_op.length === 0) {
      this.mesh = null;
      return;
    }
    const geometry = meshToGeometry(payload, highlighted);
    geometry.center();
    const material = new THREE.MeshStandardMaterial({
      vertexColors: true,
      side: THREE.DoubleSide,
      flatShading: true,
    });
    this.mesh = new THREE.Mesh(geometry, material);
    this.scene.add(this.mesh);
  }

  dispose() {
    cancelAnimationFrame(this.frame);
    this.renderer.dispose();
  }
}
