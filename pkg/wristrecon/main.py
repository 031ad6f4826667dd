"""
WristRecon 腕部视角重建工具包 - 主入口

1. synth             生成合成场景并导出全部输入文件
2. solve-pose        由锚点-腕部匹配求解腕部相机位姿 (SPC 损失最小化)
3. render-condition  把点云沿轨迹渲染为腕部视角条件图
4. eval              位姿误差、PSNR/SSIM 与重投影误差
5. tokens            条件 token 组装与形状报告

用法: python main.py [--config manifest.yaml] 子命令 [参数]
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from src.cli_io.cli import main  # noqa: E402

if __name__ == "__main__":
    main()
