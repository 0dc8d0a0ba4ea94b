// Side-by-side 3D view of the demonstrator and executor arms (three.js).

import * as THREE from "three";
import { armCenterline } from "./pcc.js";
import type { StateMessage } from "./protocol.js";

const DEMO_LENGTHS = [0.2, 0.2, 0.2];
const TUBE_RADIUS = 0.018;
const SPACING = 0.55; // world offset of each arm from the center

class ArmMesh {
  readonly group = new THREE.Group();
  private tube: THREE.Mesh | null = null;
  private readonly material: THREE.MeshStandardMaterial;

  constructor(color: number) {
    this.material = new THREE.MeshStandardMaterial({
      color,
      roughness: 0.55,
      metalness: 0.1,
    });
  }

  update(
    thetas: readonly number[],
    phis: readonly number[],
    scale: number,
  ): void {
    const lengths = DEMO_LENGTHS.map((L) => L * scale);
    const shape = armCenterline(thetas, phis, lengths, 24);
    const points: THREE.Vector3[] = [];
    for (let i = 0; i < shape.points.length; i += 3) {
      // simulator z-up -> three.js y-up
      points.push(new THREE.Vector3(shape.points[i], shape.points[i + 2], -shape.points[i + 1]));
    }
    const curve = new THREE.CatmullRomCurve3(points);
    const geometry = new THREE.TubeGeometry(curve, 96, TUBE_RADIUS * Math.sqrt(scale), 12, false);
    if (this.tube === null) {
      this.tube = new THREE.Mesh(geometry, this.material);
      this.group.add(this.tube);
    } else {
      this.tube.geometry.dispose();
      this.tube.geometry = geometry;
    }
  }
}

export class TwinScene {
  private readonly renderer: THREE.WebGLRenderer;
  private readonly scene = new THREE.Scene();
  private readonly camera: THREE.OrthographicCamera;
  private readonly demoArm = new ArmMesh(0xd64545);
  private readonly execArm = new ArmMesh(0x3f7fbf);
  private readonly placeholder: THREE.Group;

  constructor(private readonly canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    this.scene.background = new THREE.Color(0x14161a);

    this.camera = new THREE.OrthographicCamera(-1, 1, 1, -1, 0.01, 100);
    this.camera.position.set(0, 0.55, 3.2);
    this.camera.lookAt(0, 0.45, 0);

    const key = new THREE.DirectionalLight(0xffffff, 2.2);
    key.position.set(1.5, 2.5, 2.0);
    this.scene.add(key, new THREE.AmbientLight(0xffffff, 0.45));

    const floor = new THREE.GridHelper(3.0, 30, 0x2c313a, 0x20242b);
    this.scene.add(floor);

    this.demoArm.group.position.set(-SPACING, 0, 0);
    this.execArm.group.position.set(SPACING, 0, 0);
    this.scene.add(this.demoArm.group, this.execArm.group);

    // shown until the first state message arrives
    this.placeholder = new THREE.Group();
    const ring = new THREE.Mesh(
      new THREE.TorusGeometry(0.18, 0.015, 12, 48),
      new THREE.MeshBasicMaterial({ color: 0x555c66 }),
    );
    ring.position.set(0, 0.55, 0);
    this.placeholder.add(ring);
    this.scene.add(this.placeholder);

    this.resize();
    window.addEventListener("resize", () => this.resize());
  }

  resize(): void {
    const width = this.canvas.clientWidth || this.canvas.width;
    const height = this.canvas.clientHeight || this.canvas.height;
    const aspect = width / Math.max(height, 1);
    const span = 1.3;
    this.camera.left = -span * aspect;
    this.camera.right = span * aspect;
    this.camera.top = span;
    this.camera.bottom = -span * 0.25;
    this.camera.updateProjectionMatrix();
    this.renderer.setSize(width, height, false);
  }

  /** World meters per CSS pixel of the current projection (for drag mapping). */
  worldPerPixel(): number {
    const width = this.canvas.clientWidth || this.canvas.width;
    return (this.camera.right - this.camera.left) / Math.max(width, 1);
  }

  render(state: StateMessage | null): void {
    if (state !== null) {
      this.placeholder.visible = false;
      this.demoArm.update(state.demo.theta, state.demo.phi, 1.0);
      this.execArm.update(state.exec.theta, state.exec.phi, state.scale);
    } else {
      this.placeholder.visible = true;
    }
    this.renderer.render(this.scene, this.camera);
  }
}
