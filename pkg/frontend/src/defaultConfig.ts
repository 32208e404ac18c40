/** Default document for the config box: one arena showing every catalog
 * entry, identical to configs/showcase.yml in the repository root. */

export const DEFAULT_CONFIG = `# One of everything: goals at z=8, movables at z=16, immovables at z=26,
# zones at z=34. The agent starts at the south wall facing north; the three
# Move goals launch along their headings at reset.
!ArenaConfig
arenas:
  0: !Arena
    t: 500
    blackouts: [100, 110]
    items:
    - !Item
      name: Agent
      positions:
      - !Vector3 {x: 20, y: 0, z: 2}
      rotations: [0]
    - !Item
      name: GoodGoal
      positions:
      - !Vector3 {x: 4, y: 0, z: 8}
      sizes:
      - !Vector3 {x: 1, y: 1, z: 1}
    - !Item
      name: GoodGoalMulti
      positions:
      - !Vector3 {x: 9, y: 0, z: 8}
      sizes:
      - !Vector3 {x: 1, y: 1, z: 1}
    - !Item
      name: BadGoal
      positions:
      - !Vector3 {x: 14, y: 0, z: 8}
      sizes:
      - !Vector3 {x: 1, y: 1, z: 1}
    - !Item
      name: GoodGoalMove
      positions:
      - !Vector3 {x: 20, y: 0, z: 8}
      rotations: [0]
      sizes:
      - !Vector3 {x: 1, y: 1, z: 1}
    - !Item
      name: GoodGoalMultiMove
      positions:
      - !Vector3 {x: 26, y: 0, z: 8}
      rotations: [0]
      sizes:
      - !Vector3 {x: 1, y: 1, z: 1}
    - !Item
      name: BadGoalMove
      positions:
      - !Vector3 {x: 32, y: 0, z: 8}
      rotations: [0]
      sizes:
      - !Vector3 {x: 1, y: 1, z: 1}
    - !Item
      name: Cardbox1
      positions:
      - !Vector3 {x: 6, y: 0, z: 16}
      rotations: [0]
      sizes:
      - !Vector3 {x: 1, y: 1, z: 1}
    - !Item
      name: Cardbox2
      positions:
      - !Vector3 {x: 12, y: 0, z: 16}
      rotations: [0]
      sizes:
      - !Vector3 {x: 1, y: 1, z: 1}
    - !Item
      name: LObject
      positions:
      - !Vector3 {x: 18, y: 0, z: 16}
      rotations: [0]
      sizes:
      - !Vector3 {x: 2, y: 1, z: 6}
    - !Item
      name: LObject2
      positions:
      - !Vector3 {x: 26, y: 0, z: 16}
      rotations: [0]
      sizes:
      - !Vector3 {x: 2, y: 1, z: 6}
    - !Item
      name: UObject
      positions:
      - !Vector3 {x: 33, y: 0, z: 16}
      rotations: [0]
      sizes:
      - !Vector3 {x: 2, y: 1, z: 6}
    - !Item
      name: Wall
      positions:
      - !Vector3 {x: 5, y: 0, z: 26}
      rotations: [0]
      colors:
      - !RGB {r: 153, g: 153, b: 153}
      sizes:
      - !Vector3 {x: 4, y: 3, z: 1}
    - !Item
      name: WallTransparent
      positions:
      - !Vector3 {x: 12, y: 0, z: 26}
      rotations: [0]
      sizes:
      - !Vector3 {x: 4, y: 3, z: 1}
    - !Item
      name: Ramp
      positions:
      - !Vector3 {x: 19, y: 0, z: 26}
      rotations: [0]
      colors:
      - !RGB {r: 255, g: 100, b: 255}
      sizes:
      - !Vector3 {x: 4, y: 2, z: 4}
    - !Item
      name: CylinderTunnel
      positions:
      - !Vector3 {x: 27, y: 0, z: 26}
      rotations: [0]
      sizes:
      - !Vector3 {x: 4, y: 4, z: 4}
    - !Item
      name: CylinderTunnelTransparent
      positions:
      - !Vector3 {x: 34, y: 0, z: 26}
      rotations: [0]
      sizes:
      - !Vector3 {x: 4, y: 4, z: 4}
    - !Item
      name: DeathZone
      positions:
      - !Vector3 {x: 10, y: 0, z: 34}
      sizes:
      - !Vector3 {x: 6, y: 0, z: 4}
    - !Item
      name: HotZone
      positions:
      - !Vector3 {x: 28, y: 0, z: 34}
      sizes:
      - !Vector3 {x: 6, y: 0, z: 4}
`;
